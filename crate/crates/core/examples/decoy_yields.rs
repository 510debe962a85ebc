//! Decoy-state bounds on the vacuum and single-photon yields and the
//! single-photon error rate, compared with the channel's true values.
//!
//! Run with `cargo run --example decoy_yields`.

use photocert::decoy::{
    bound_error_gain_b1, bound_error_rate_e1, bound_yields_with_envelopes, intensity_envelopes,
    IntensitySettings,
};
use photocert::keyrate::{simulate_channel, ChannelModel, IntensitySources, SignalKnowledge};
use photocert::presets::Preset;
use photocert::stats_bounds::{bound_photon_probabilities, CorrelationConstraints};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let settings = IntensitySettings::default();
    let channel = ChannelModel::default();
    let preset = Preset::AboveThreshold;
    let constraints = CorrelationConstraints::new(preset.measurements(), 7.0, settings.u)?;
    let knowledge = SignalKnowledge::Bounds(bound_photon_probabilities(&constraints, 25)?);
    let sources = IntensitySources::new(&preset.prepared_source(settings.u), &settings)?;
    let envelopes = intensity_envelopes(knowledge.envelope(25)?, &settings)?;

    println!(
        "{:>6}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}",
        "L", "y1 true", "y1 lower", "e1 true", "e1 closed", "e1 LP", "y0 lower"
    );
    for distance in [0.0, 20.0, 40.0, 60.0, 80.0] {
        let eta = channel.transmittance(distance);
        let obs = simulate_channel(&sources, &channel, distance, 0.0)?;
        let y = bound_yields_with_envelopes(&obs.gains, &envelopes)?;
        let e1 = bound_error_rate_e1(
            &obs.gains,
            knowledge.p_lower(0),
            y.y0_lower,
            0.0,
            knowledge.p_lower(1),
            y.y1_lower,
        )?;
        let b1 = bound_error_gain_b1(&obs.gains, &envelopes, y.y0_lower, 0.0)?;
        println!(
            "{distance:>6}{:>12.4e}{:>12.4e}{:>12.4}{:>12.4}{:>12.4}{:>12.3e}",
            channel.yield_n(1, eta),
            y.y1_lower,
            channel.error_rate_n(1, eta),
            e1.e1_upper,
            (b1 / y.y1_lower).min(0.5),
            y.y0_lower
        );
    }
    Ok(())
}
