//! Simulated four-detector correlation measurement: counts coincidences and
//! estimates g2, g3, g4 with their standard errors.
//!
//! Run with `cargo run --release --example hbt_simulation`.

use photocert::hbt::{estimate_correlation, simulate_counts, DetectorConfig};
use photocert::SourceKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let detector = DetectorConfig::with_efficiency(0.01);
    let pulses = 10_000_000;
    for text in ["poisson:2", "thermal:2", "single"] {
        let source: SourceKind = text.parse()?;
        let counts = simulate_counts(&source, pulses, &detector, 1)?;
        println!(
            "{text}: singles {:?}, pairs {}, triples {}, quads {}",
            counts.singles,
            counts.pair_counts.iter().sum::<u64>(),
            counts.triple_counts.iter().sum::<u64>(),
            counts.quad_count
        );
        for m in 2..=4 {
            match estimate_correlation(&counts, m) {
                Ok(g) => println!("  g{m} = {:.4} +/- {:.4}", g.value, g.sigma),
                Err(e) => println!("  g{m}: {e}"),
            }
        }
    }
    Ok(())
}
