use photocert::decoy::{
    bound_error_gain_b1, bound_error_rate_e1, bound_yields_with_envelopes, intensity_envelopes,
    IntensityEnvelopes, IntensitySettings, ObservedGains, PhotonProbabilityEnvelope,
};
use photocert::hbt::CorrelationMeasurement;
use photocert::keyrate::{simulate_channel, ChannelModel, IntensitySources};
use photocert::photon_model::{correlation_from_distribution, mean_photon_number};
use photocert::presets::Preset;
use photocert::stats_bounds::{bound_photon_probabilities, CorrelationConstraints};
use photocert::SourceKind;
use proptest::prelude::*;

const N_CUT: usize = 25;

#[derive(Debug, Clone)]
struct Scenario {
    source: SourceKind,
    channel: ChannelModel,
    distance_km: f64,
}

fn arb_scenario() -> impl Strategy<Value = Scenario> {
    let source = prop_oneof![
        (0.2f64..0.8).prop_map(|mean| SourceKind::Poisson { mean }),
        (0.2f64..0.6).prop_map(|mean| SourceKind::Thermal { mean }),
        (0.2f64..0.6, 0.05f64..0.95).prop_map(|(mean, w)| SourceKind::Mixture {
            components: vec![
                (w, SourceKind::Thermal { mean }),
                (1.0 - w, SourceKind::Poisson { mean })
            ],
        }),
    ];
    let channel = (0.15f64..0.3, 0.05f64..0.5, 1e-6f64..1e-4, 0.0f64..0.05).prop_map(
        |(alpha, det, y0, ed)| ChannelModel {
            alpha_db_per_km: alpha,
            detector_efficiency: det,
            dark_click_prob: y0,
            misalignment: ed,
            vacuum_error: 0.5,
        },
    );
    (source, channel, 0.0f64..80.0).prop_map(|(source, channel, distance_km)| Scenario {
        source,
        channel,
        distance_km,
    })
}

fn settings_for(source: &SourceKind) -> IntensitySettings {
    IntensitySettings {
        u: source.mean(),
        ..IntensitySettings::default()
    }
}

fn observe(s: &Scenario, margin: f64) -> ObservedGains {
    let sources = IntensitySources::new(&s.source, &settings_for(&s.source)).unwrap();
    simulate_channel(&sources, &s.channel, s.distance_km, margin)
        .unwrap()
        .gains
}

fn exact_envelopes(s: &Scenario) -> IntensityEnvelopes {
    let dist = s.source.auto_distribution(N_CUT).unwrap();
    let signal = PhotonProbabilityEnvelope::exact(&dist, N_CUT).unwrap();
    intensity_envelopes(signal, &settings_for(&s.source)).unwrap()
}

/// Envelopes from correlation bounds on the signal's own exact correlations.
fn certified_envelopes(s: &Scenario, max_order: u32) -> IntensityEnvelopes {
    let dist = s.source.auto_distribution(N_CUT).unwrap();
    let measurements = (2..=max_order)
        .map(|m| CorrelationMeasurement {
            order: m,
            value: correlation_from_distribution(&dist, m).unwrap(),
            sigma: 1e-4,
        })
        .collect();
    let c = CorrelationConstraints::new(measurements, 7.0, mean_photon_number(&dist)).unwrap();
    let bounds = bound_photon_probabilities(&c, N_CUT).unwrap();
    let signal = PhotonProbabilityEnvelope::from_bounds(&bounds, N_CUT).unwrap();
    intensity_envelopes(signal, &settings_for(&s.source)).unwrap()
}

fn true_y1(s: &Scenario) -> f64 {
    s.channel.yield_n(1, s.channel.transmittance(s.distance_km))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_are_sound(s in arb_scenario()) {
        let gains = observe(&s, 0.0);
        let eta = s.channel.transmittance(s.distance_km);
        for envelopes in [exact_envelopes(&s), certified_envelopes(&s, 4), certified_envelopes(&s, 2)] {
            let y = bound_yields_with_envelopes(&gains, &envelopes).unwrap();
            prop_assert!(y.y1_lower <= true_y1(&s) + 1e-9, "y1 {} > {}", y.y1_lower, true_y1(&s));
            prop_assert!(y.y0_lower <= s.channel.dark_click_prob + 1e-9);
            let p0 = envelopes[0].lower()[0];
            let p1 = envelopes[0].lower()[1];
            if let Ok(e1) = bound_error_rate_e1(&gains, p0, y.y0_lower, 0.0, p1, y.y1_lower) {
                prop_assert!(e1.e1_upper >= s.channel.error_rate_n(1, eta) - 1e-9 || e1.clamped);
            }
        }
    }

    #[test]
    fn wider_gain_intervals_never_raise_y1(s in arb_scenario(), m1 in 0.0f64..0.05, extra in 0.0f64..0.05) {
        let envelopes = exact_envelopes(&s);
        let narrow = bound_yields_with_envelopes(&observe(&s, m1), &envelopes).unwrap();
        let wide = bound_yields_with_envelopes(&observe(&s, m1 + extra), &envelopes).unwrap();
        prop_assert!(wide.y1_lower <= narrow.y1_lower + 1e-9);
        prop_assert!(wide.y0_lower <= narrow.y0_lower + 1e-9);
    }

    #[test]
    fn tighter_photon_bounds_never_lower_y1(s in arb_scenario()) {
        let gains = observe(&s, 0.0);
        let loose = bound_yields_with_envelopes(&gains, &certified_envelopes(&s, 2)).unwrap();
        let tight = bound_yields_with_envelopes(&gains, &certified_envelopes(&s, 4)).unwrap();
        let exact = bound_yields_with_envelopes(&gains, &exact_envelopes(&s)).unwrap();
        prop_assert!(tight.y1_lower >= loose.y1_lower - 1e-9);
        prop_assert!(exact.y1_lower >= tight.y1_lower - 1e-9);
    }

    #[test]
    fn e1_bound_is_monotone(
        s in arb_scenario(),
        scale_p in 0.5f64..1.0,
        scale_y in 0.5f64..1.0,
        scale_b in 1.0f64..1.5,
    ) {
        let gains = observe(&s, 0.0);
        let envelopes = exact_envelopes(&s);
        let y = bound_yields_with_envelopes(&gains, &envelopes).unwrap();
        let (p0, p1) = (envelopes[0].lower()[0], envelopes[0].lower()[1]);
        prop_assume!(y.y1_lower > 0.0);
        let base = bound_error_rate_e1(&gains, p0, y.y0_lower, 0.0, p1, y.y1_lower).unwrap();
        let less_p1 = bound_error_rate_e1(&gains, p0, y.y0_lower, 0.0, p1 * scale_p, y.y1_lower).unwrap();
        let less_y1 = bound_error_rate_e1(&gains, p0, y.y0_lower, 0.0, p1, y.y1_lower * scale_y).unwrap();
        let mut more_errors = gains;
        more_errors.signal.error_gain.upper = (gains.signal.error_gain.upper * scale_b).min(1.0);
        let more_b = bound_error_rate_e1(&more_errors, p0, y.y0_lower, 0.0, p1, y.y1_lower).unwrap();
        prop_assert!(less_p1.unclamped >= base.unclamped);
        prop_assert!(less_y1.unclamped >= base.unclamped);
        prop_assert!(more_b.unclamped >= base.unclamped);
    }

    #[test]
    fn linear_programme_route_is_no_looser(s in arb_scenario()) {
        let gains = observe(&s, 0.0);
        let envelopes = exact_envelopes(&s);
        let y = bound_yields_with_envelopes(&gains, &envelopes).unwrap();
        prop_assume!(y.y1_lower > 1e-12);
        let (p0, p1) = (envelopes[0].lower()[0], envelopes[0].lower()[1]);
        let closed = bound_error_rate_e1(&gains, p0, y.y0_lower, 0.0, p1, y.y1_lower).unwrap();
        let b1 = bound_error_gain_b1(&gains, &envelopes, y.y0_lower, 0.0).unwrap();
        prop_assert!(b1 / y.y1_lower <= closed.unclamped * (1.0 + 1e-9) + 1e-12);
    }
}

#[test]
fn lossless_channel_certifies_near_unit_yield() {
    let s = Scenario {
        source: SourceKind::Poisson { mean: 0.42 },
        channel: ChannelModel {
            alpha_db_per_km: 0.0,
            detector_efficiency: 1.0,
            ..ChannelModel::default()
        },
        distance_km: 0.0,
    };
    let y = bound_yields_with_envelopes(&observe(&s, 0.0), &exact_envelopes(&s)).unwrap();
    assert!(y.y1_lower > 0.99, "{}", y.y1_lower);
}

#[test]
fn twenty_kilometres_is_within_five_percent() {
    let s = Scenario {
        source: SourceKind::Poisson { mean: 0.42 },
        channel: ChannelModel::default(),
        distance_km: 20.0,
    };
    let y = bound_yields_with_envelopes(&observe(&s, 0.0), &exact_envelopes(&s)).unwrap();
    let truth = true_y1(&s);
    assert!(y.y1_lower <= truth);
    assert!(y.y1_lower >= 0.95 * truth, "{} vs {truth}", y.y1_lower);
}

#[test]
fn preset_envelopes_are_sound_for_their_sources() {
    for preset in Preset::ALL {
        let c = CorrelationConstraints::new(preset.measurements(), 7.0, 0.42).unwrap();
        let bounds = bound_photon_probabilities(&c, N_CUT).unwrap();
        let s = Scenario {
            source: preset.prepared_source(0.42),
            channel: ChannelModel::default(),
            distance_km: 10.0,
        };
        let signal = PhotonProbabilityEnvelope::from_bounds(&bounds, N_CUT).unwrap();
        let envelopes = intensity_envelopes(signal, &IntensitySettings::default()).unwrap();
        let y = bound_yields_with_envelopes(&observe(&s, 0.0), &envelopes).unwrap();
        assert!(
            y.y1_lower > 0.0 && y.y1_lower <= true_y1(&s) + 1e-12,
            "{preset}: {}",
            y.y1_lower
        );
    }
}
