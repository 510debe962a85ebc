//! Secret-key fraction versus fibre length for a laser diode above and below
//! threshold, compared with an ideal Poisson source.
//!
//! Run with `cargo run --release --example key_rate_scan`.

use photocert::keyrate::{
    distance_grid, max_positive_distance, rate_vs_distance_scan, ChannelModel, KeyRateScenario,
    ProtocolParams, SignalKnowledge,
};
use photocert::presets::Preset;
use photocert::stats_bounds::{
    bound_photon_probabilities, CorrelationConstraints, DEFAULT_GAMMA, DEFAULT_N_CUT,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let channel = ChannelModel::default();
    let params = ProtocolParams::default();
    let mu = params.intensities.u;
    let grid = distance_grid(0.0, 100.0, 5.0)?;

    let bounded =
        |preset: Preset, orders: &[u32]| -> Result<KeyRateScenario, Box<dyn std::error::Error>> {
            let constraints =
                CorrelationConstraints::new(preset.measurements_for(orders), DEFAULT_GAMMA, mu)?;
            let bounds = bound_photon_probabilities(&constraints, DEFAULT_N_CUT)?;
            Ok(KeyRateScenario::new(
                preset.prepared_source(mu),
                SignalKnowledge::Bounds(bounds),
            ))
        };

    let curves = [
        ("poisson-ideal", KeyRateScenario::poisson_ideal(mu)?),
        ("above g2g3g4", bounded(Preset::AboveThreshold, &[2, 3, 4])?),
        ("above g2g3", bounded(Preset::AboveThreshold, &[2, 3])?),
        ("above g2", bounded(Preset::AboveThreshold, &[2])?),
        ("below g2g3g4", bounded(Preset::BelowThreshold, &[2, 3, 4])?),
    ];

    let mut rates = Vec::new();
    for (name, scenario) in &curves {
        let points = rate_vs_distance_scan(scenario, &channel, &params, &grid)?;
        let reach = max_positive_distance(&points).map_or("none".into(), |d| format!("{d} km"));
        println!("{name:>14}: positive up to {reach}");
        rates.push(points);
    }

    print!("\n{:>8}", "L [km]");
    for (name, _) in &curves {
        print!("{name:>15}");
    }
    println!();
    for (i, d) in grid.iter().enumerate() {
        print!("{d:>8}");
        for curve in &rates {
            print!("{:>15.3e}", curve[i].r);
        }
        println!();
    }
    Ok(())
}
