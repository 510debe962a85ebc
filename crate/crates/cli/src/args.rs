//! Command-line flags. Every flag is optional so that values can also come
//! from a JSON config file (`--config`); flags win over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "photocert",
    version,
    about = "Certify photon-number statistics and decoy-state key rates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a four-detector HBT measurement and write click records.
    Simulate(SimulateArgs),
    /// Count coincidences in a click-record file and estimate g2, g3, g4.
    Estimate(EstimateArgs),
    /// Bound p0..p3 from correlation measurements.
    Bound(BoundArgs),
    /// Scan the secure key rate over fibre length.
    Keyrate(KeyrateArgs),
    /// Run simulate, estimate, bound and keyrate in sequence.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PresetChoice {
    /// Laser diode above threshold (nearly Poissonian).
    PaperAboveThreshold,
    /// Laser diode below threshold (quasi-thermal).
    PaperBelowThreshold,
    /// Ideal Poisson source with exactly known statistics.
    PoissonIdeal,
}

/// Flags shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON file with default values for this command's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorArgs {
    /// Detection efficiency of each detector.
    #[arg(long)]
    pub efficiency: Option<f64>,
    /// Largest efficiency accepted as linear response.
    #[arg(long)]
    pub eta0_cap: Option<f64>,
    /// Dark-count probability per pulse and detector.
    #[arg(long)]
    pub dark_count: Option<f64>,
    /// Beam-splitter routing probabilities, four comma-separated values.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    /// Source, e.g. `poisson:0.42`, `thermal:0.42`, `single`,
    /// `mix:0.7*thermal:0.42+0.3*poisson:0.42`.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub pulses: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Record file (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateArgs {
    /// Click-record file.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Report file (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub preset: Option<PresetChoice>,
    /// Correlation report written by `estimate`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Hand-entered g2 as `VALUE:SIGMA`.
    #[arg(long)]
    pub g2: Option<String>,
    #[arg(long)]
    pub g3: Option<String>,
    #[arg(long)]
    pub g4: Option<String>,
    /// Mean photon number of the signal.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Orders to use, e.g. `2,3,4`.
    #[arg(long)]
    pub orders: Option<String>,
    /// Confidence half-width in standard deviations.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n_cut: Option<usize>,
    /// Bounds file (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelArgs {
    #[arg(long)]
    pub alpha_db_per_km: Option<f64>,
    #[arg(long)]
    pub detector_efficiency: Option<f64>,
    #[arg(long)]
    pub dark_click_prob: Option<f64>,
    #[arg(long)]
    pub misalignment: Option<f64>,
    #[arg(long)]
    pub vacuum_error: Option<f64>,
    /// Relative half-width of the simulated gain intervals.
    #[arg(long)]
    pub gain_margin: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolArgs {
    #[arg(long)]
    pub p_z: Option<f64>,
    #[arg(long)]
    pub f_ec: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub e0_lower: Option<f64>,
    /// Decoy intensity.
    #[arg(long)]
    pub v: Option<f64>,
    /// Vacuum intensity.
    #[arg(long)]
    pub w: Option<f64>,
    #[arg(long)]
    pub p_u: Option<f64>,
    #[arg(long)]
    pub p_v: Option<f64>,
    #[arg(long)]
    pub p_w: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KeyrateArgs {
    #[arg(long, value_enum)]
    pub preset: Option<PresetChoice>,
    /// Bounds file written by `bound`.
    #[arg(long)]
    pub bounds: Option<PathBuf>,
    /// Source actually sent through the channel when using `--bounds`.
    #[arg(long)]
    pub source: Option<String>,
    /// Signal intensity.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub orders: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n_cut: Option<usize>,
    /// Distances as `START:STOP:STEP` in km.
    #[arg(long)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// CSV file (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineArgs {
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub pulses: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Signal intensity; defaults to the source mean.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub orders: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n_cut: Option<usize>,
    #[arg(long)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Directory for all outputs.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

/// Overlays the non-null values of `flags` onto `base`, recursing into
/// nested objects.
fn overlay(base: &mut Value, flags: Value) {
    match (base, flags) {
        (Value::Object(base), Value::Object(flags)) => {
            for (key, value) in flags {
                match base.get_mut(&key) {
                    Some(slot @ Value::Object(_)) => overlay(slot, value),
                    Some(slot) if !value.is_null() => *slot = value,
                    None => {
                        base.insert(key, value);
                    }
                    Some(_) => {}
                }
            }
        }
        (base, flags) if !flags.is_null() => *base = flags,
        _ => {}
    }
}

/// Combines a config file with command-line flags; flags take precedence.
pub fn with_config<T>(flags: T, common: &Common) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned,
{
    let Some(path) = &common.config else {
        return Ok(flags);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut merged: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    if !merged.is_object() {
        return Err(CliError::Validation(format!(
            "{}: expected a JSON object",
            path.display()
        )));
    }
    let flags = serde_json::to_value(flags).expect("flags serialise");
    overlay(&mut merged, flags);
    serde_json::from_value(merged).map_err(|e| config_error(path, e))
}

fn config_error(path: &Path, e: serde_json::Error) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}
