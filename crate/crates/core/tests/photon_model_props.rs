use photocert::photon_model::{
    correlation_from_distribution, mean_photon_number, mixture_distribution, poisson_distribution,
    single_photon_distribution, thermal_distribution,
};
use photocert::SourceKind;
use proptest::prelude::*;

proptest! {
    #[test]
    fn poisson_correlations_are_unity(mu in 0.01f64..5.0) {
        let dist = SourceKind::Poisson { mean: mu }.auto_distribution(25).unwrap();
        for m in 2..=4 {
            let g = correlation_from_distribution(&dist, m).unwrap();
            prop_assert!((g - 1.0).abs() < 1e-6, "g{m}({mu}) = {g}");
        }
    }

    #[test]
    fn equal_mean_mixtures_are_linear_in_g(w in 0.0f64..1.0, v in 0.0f64..1.0) {
        // Three components with mean 1: thermal, Poisson and a single photon.
        let n_cut = 80;
        let comps = [
            thermal_distribution(1.0, n_cut).unwrap(),
            poisson_distribution(1.0, n_cut).unwrap(),
            single_photon_distribution(n_cut).unwrap(),
        ];
        let weights = [w * v, w * (1.0 - v), 1.0 - w];
        let kept: Vec<usize> = (0..3).filter(|&i| weights[i] > 0.0).collect();
        let mix = mixture_distribution(
            &kept.iter().map(|&i| comps[i].clone()).collect::<Vec<_>>(),
            &kept.iter().map(|&i| weights[i]).collect::<Vec<_>>(),
        ).unwrap();
        for m in 2..=4 {
            let expected: f64 = kept
                .iter()
                .map(|&i| weights[i] * correlation_from_distribution(&comps[i], m).unwrap())
                .sum();
            let g = correlation_from_distribution(&mix, m).unwrap();
            prop_assert!((g - expected).abs() <= 1e-9 * expected.max(1.0), "g{m}: {g} vs {expected}");
        }
    }

    #[test]
    fn distributions_are_normalised(mu in 0.01f64..3.0) {
        for kind in [SourceKind::Poisson { mean: mu }, SourceKind::Thermal { mean: mu }] {
            let dist = kind.auto_distribution(25).unwrap();
            prop_assert!((dist.total_mass() - 1.0).abs() < 1e-9);
            prop_assert!((mean_photon_number(&dist) - mu).abs() < 1e-6 * mu.max(1.0));
        }
    }

    #[test]
    fn correlation_is_deterministic(mu in 0.01f64..3.0, m in 2u32..=4) {
        let a = thermal_distribution(mu, 200).unwrap();
        let b = thermal_distribution(mu, 200).unwrap();
        prop_assert_eq!(
            correlation_from_distribution(&a, m).unwrap().to_bits(),
            correlation_from_distribution(&b, m).unwrap().to_bits()
        );
    }
}

#[test]
fn thermal_correlations_approach_factorials_monotonically() {
    for (m, factorial) in [(2u32, 2.0), (3, 6.0), (4, 24.0)] {
        let mut previous = 0.0;
        for n_cut in [30, 40, 50, 60, 80] {
            let g = correlation_from_distribution(&thermal_distribution(0.42, n_cut).unwrap(), m)
                .unwrap();
            assert!(g >= previous, "g{m} decreased at n_cut = {n_cut}");
            previous = g;
        }
        let at_60 =
            correlation_from_distribution(&thermal_distribution(0.42, 60).unwrap(), m).unwrap();
        assert!((at_60 - factorial).abs() < 1e-4, "g{m} = {at_60}");
    }
}

#[test]
fn single_photon_correlations_vanish() {
    let dist = single_photon_distribution(25).unwrap();
    for m in 2..=4 {
        assert_eq!(correlation_from_distribution(&dist, m).unwrap(), 0.0);
    }
}
