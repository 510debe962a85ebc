#![allow(clippy::needless_range_loop)]

use photocert::hbt::{
    count_coincidences, estimate_correlation, simulate_counts, simulate_pulse_train, write_records,
    CoincidenceCounts, DetectionRecord, DetectorConfig, RecordReader,
};
use photocert::SourceKind;
use proptest::prelude::*;

fn cfg(efficiency: f64) -> DetectorConfig {
    DetectorConfig::with_efficiency(efficiency)
}

/// Plain recount from the click booleans, independent of the pattern
/// histogram used by the library.
fn recount(records: &[DetectionRecord]) -> CoincidenceCounts {
    let mut c = CoincidenceCounts {
        n_pulses: records.len() as u64,
        ..Default::default()
    };
    for r in records {
        let k = r.clicks;
        for i in 0..4 {
            c.singles[i] += k[i] as u64;
        }
        let mut p = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                c.pair_counts[p] += (k[i] && k[j]) as u64;
                p += 1;
            }
        }
        let mut t = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                for l in j + 1..4 {
                    c.triple_counts[t] += (k[i] && k[j] && k[l]) as u64;
                    t += 1;
                }
            }
        }
        c.quad_count += k.iter().all(|&x| x) as u64;
    }
    c
}

/// `|a - b| <= 5 sqrt(sa^2 + sb^2)`.
fn consistent(a: f64, sa: f64, b: f64, sb: f64) -> bool {
    (a - b).abs() <= 5.0 * (sa * sa + sb * sb).sqrt()
}

#[test]
fn counts_match_an_independent_recount() {
    let source = SourceKind::Poisson { mean: 0.42 };
    let records: Vec<_> = simulate_pulse_train(&source, 1_000_000, &cfg(0.01), 5)
        .unwrap()
        .collect();
    let counts = count_coincidences(records.iter().copied()).unwrap();
    assert_eq!(counts, recount(&records));
    assert_eq!(
        counts,
        simulate_counts(&source, 1_000_000, &cfg(0.01), 5).unwrap()
    );
}

#[test]
fn identical_inputs_give_identical_results() {
    let source = SourceKind::Thermal { mean: 0.42 };
    let a: Vec<_> = simulate_pulse_train(&source, 200_000, &cfg(0.01), 99)
        .unwrap()
        .collect();
    let b: Vec<_> = simulate_pulse_train(&source, 200_000, &cfg(0.01), 99)
        .unwrap()
        .collect();
    assert_eq!(a, b);
    let ca = simulate_counts(&source, 200_000, &cfg(0.01), 99).unwrap();
    let cb = simulate_counts(&source, 200_000, &cfg(0.01), 99).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(
        estimate_correlation(&ca, 2).unwrap(),
        estimate_correlation(&cb, 2).unwrap()
    );
}

#[test]
fn poisson_singles_rate_matches_binomial_thinning() {
    let n = 10_000_000u64;
    let counts =
        simulate_counts(&SourceKind::Poisson { mean: 0.42 }, n, &cfg(0.005), 2024).unwrap();
    let p = 1.0 - (-0.42f64 * 0.005 / 4.0).exp();
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    for s in counts.singles {
        assert!(
            (s as f64 - n as f64 * p).abs() <= 5.0 * sd,
            "{s} vs {}",
            n as f64 * p
        );
    }
}

#[test]
fn g2_does_not_depend_on_efficiency() {
    for (source, seed) in [
        (SourceKind::Poisson { mean: 2.0 }, 1),
        (SourceKind::Thermal { mean: 2.0 }, 2),
    ] {
        let hi = simulate_counts(&source, 10_000_000, &cfg(0.01), seed).unwrap();
        let lo = simulate_counts(&source, 10_000_000, &cfg(0.002), seed + 10).unwrap();
        let a = estimate_correlation(&hi, 2).unwrap();
        let b = estimate_correlation(&lo, 2).unwrap();
        assert!(
            consistent(a.value, a.sigma, b.value, b.sigma),
            "{source}: {a:?} vs {b:?}"
        );
    }
}

#[test]
fn asymmetric_splitting_cancels() {
    let split = DetectorConfig {
        split_probs: [0.4, 0.2, 0.2, 0.2],
        ..cfg(0.01)
    };
    for (source, expected) in [
        (SourceKind::Poisson { mean: 0.42 }, 1.0),
        (SourceKind::Thermal { mean: 0.42 }, 2.0),
    ] {
        let counts = simulate_counts(&source, 10_000_000, &split, 77).unwrap();
        let g = estimate_correlation(&counts, 2).unwrap();
        assert!(
            consistent(g.value, g.sigma, expected, 0.0),
            "{source}: {g:?}"
        );
    }
}

#[test]
fn bright_coherent_light_has_unit_higher_orders() {
    // Coherent light splits into independent Poisson beams, so click
    // coincidences factorise even outside the linear-response regime.
    let counts = simulate_counts(
        &SourceKind::Poisson { mean: 20.0 },
        4_000_000,
        &cfg(0.01),
        8,
    )
    .unwrap();
    for m in 2..=4 {
        let g = estimate_correlation(&counts, m).unwrap();
        assert!(consistent(g.value, g.sigma, 1.0, 0.0), "{g:?}");
    }
}

#[test]
fn quasi_thermal_mixture_higher_orders() {
    let source: SourceKind = "mix:0.5*thermal:10+0.5*poisson:10".parse().unwrap();
    let counts = simulate_counts(&source, 4_000_000, &cfg(0.01), 21).unwrap();
    let dist = source.auto_distribution(25).unwrap();
    for m in 2..=3 {
        let g = estimate_correlation(&counts, m).unwrap();
        let truth = photocert::photon_model::correlation_from_distribution(&dist, m).unwrap();
        assert!(
            consistent(g.value, g.sigma, truth, 0.0),
            "g{m}: {g:?} vs {truth}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coincidence_invariants_hold(seed in any::<u64>(), mean in 0.1f64..20.0, eff in 0.001f64..0.01) {
        let source = SourceKind::Thermal { mean };
        let counts = simulate_counts(&source, 100_000, &cfg(eff), seed).unwrap();
        prop_assert!(counts.is_consistent());
        prop_assert_eq!(counts.n_pulses, 100_000);
        let serial = count_coincidences(simulate_pulse_train(&source, 100_000, &cfg(eff), seed).unwrap()).unwrap();
        prop_assert_eq!(counts, serial);
    }

    #[test]
    fn record_files_round_trip(gaps in prop::collection::vec((1u64..1000, 0u8..16), 1..200)) {
        let mut index = 0;
        let records: Vec<DetectionRecord> = gaps
            .iter()
            .map(|&(gap, mask)| {
                index += gap;
                DetectionRecord::from_mask(index, mask)
            })
            .collect();
        let mut bytes = Vec::new();
        write_records(&mut bytes, records.iter().copied()).unwrap();
        let parsed: Vec<_> = RecordReader::new(bytes.as_slice()).collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(&parsed, &records);
        let mut again = Vec::new();
        write_records(&mut again, parsed).unwrap();
        prop_assert_eq!(again, bytes);
    }
}
