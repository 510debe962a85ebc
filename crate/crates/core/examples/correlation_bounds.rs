//! Bounds on p0..p3 from measured correlation functions, showing how each
//! additional order tightens them.
//!
//! Run with `cargo run --example correlation_bounds`.

use photocert::presets::Preset;
use photocert::stats_bounds::{
    bound_photon_probabilities, CorrelationConstraints, DEFAULT_GAMMA, DEFAULT_N_CUT,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for preset in Preset::ALL {
        println!("{preset}");
        for orders in [&[2u32][..], &[2, 3], &[2, 3, 4]] {
            let constraints =
                CorrelationConstraints::new(preset.measurements_for(orders), DEFAULT_GAMMA, 0.42)?;
            let b = bound_photon_probabilities(&constraints, DEFAULT_N_CUT)?;
            print!("  orders {orders:?}:");
            for n in 0..4 {
                print!("  p{n} in [{:.4}, {:.4}]", b.lower[n], b.upper[n]);
            }
            println!("  (eps {:.1e})", b.epsilon_total);
        }
    }
    println!(
        "Poisson(0.42): p0 {:.4}, p1 {:.4}",
        (-0.42f64).exp(),
        0.42 * (-0.42f64).exp()
    );
    Ok(())
}
