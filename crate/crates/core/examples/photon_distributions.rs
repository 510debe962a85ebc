//! Photon-number distributions and their correlation functions for a few
//! common sources.
//!
//! Run with `cargo run --example photon_distributions`.

use photocert::photon_model::correlation_from_distribution;
use photocert::SourceKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sources = [
        "poisson:0.42",
        "thermal:0.42",
        "single",
        "mix:0.6985*thermal:0.42+0.3015*poisson:0.42",
    ];
    println!(
        "{:<46}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}",
        "source", "p0", "p1", "p2", "p3", "g2", "g3", "g4"
    );
    for text in sources {
        let source: SourceKind = text.parse()?;
        let dist = source.auto_distribution(25)?;
        print!("{text:<46}");
        for n in 0..4 {
            print!("{:>9.5}", dist.prob(n));
        }
        for m in 2..=4 {
            print!("{:>9.4}", correlation_from_distribution(&dist, m)?);
        }
        println!();
    }
    Ok(())
}
