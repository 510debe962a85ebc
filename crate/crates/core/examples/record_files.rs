//! Writing simulated click records to the text format, reading them back and
//! counting coincidences from the parsed stream.
//!
//! Run with `cargo run --example record_files`.

use photocert::hbt::{
    count_coincidences, estimate_correlation, simulate_pulse_train, write_records, DetectorConfig,
    RecordReader,
};
use photocert::SourceKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source: SourceKind = "thermal:0.42".parse()?;
    let train = simulate_pulse_train(
        &source,
        1_000_000,
        &DetectorConfig::with_efficiency(0.01),
        7,
    )?;
    let mut bytes = Vec::new();
    let written = write_records(&mut bytes, train)?;
    println!("{written} records, {} bytes; first lines:", bytes.len());
    for line in String::from_utf8_lossy(&bytes[..64]).lines().take(3) {
        println!("  {line}");
    }

    let parsed: Vec<_> = RecordReader::new(bytes.as_slice()).collect::<Result<_, _>>()?;
    let counts = count_coincidences(parsed)?;
    let g2 = estimate_correlation(&counts, 2)?;
    println!(
        "g2 = {:.3} +/- {:.3} from {} pulses",
        g2.value, g2.sigma, counts.n_pulses
    );

    let broken = "12 01x1\n";
    if let Some(Err(e)) = RecordReader::new(broken.as_bytes()).next() {
        println!("malformed input rejected: {e}");
    }
    Ok(())
}
