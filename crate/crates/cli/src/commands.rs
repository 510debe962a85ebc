use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use photocert::hbt::{
    estimate_correlation, simulate_pulse_train, write_record, CoincidenceCounter,
    CoincidenceCounts, CorrelationMeasurement, DetectorConfig, HbtError, RecordReader,
};
use photocert::keyrate::{
    max_positive_distance, parse_distance_grid, rate_vs_distance_scan, write_scan_csv,
    ChannelModel, KeyRatePoint, KeyRateScenario, ProtocolParams, SignalKnowledge,
};
use photocert::presets::Preset;
use photocert::stats_bounds::{
    bound_photon_probabilities, CorrelationConstraints, ProbabilityBounds, DEFAULT_GAMMA,
    DEFAULT_N_CUT,
};
use photocert::SourceKind;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{
    with_config, BoundArgs, ChannelArgs, DetectorArgs, EstimateArgs, KeyrateArgs, PipelineArgs,
    PresetChoice, ProtocolArgs, SimulateArgs,
};
use crate::error::CliError;
use crate::output::{ensure_writable, metadata, to_value, write_json_file, Destination};

pub const DEFAULT_MU: f64 = 0.42;
pub const DEFAULT_PULSES: u64 = 1_000_000;
pub const DEFAULT_GRID: &str = "0:100:5";

fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::Validation(format!("--{flag} is required")))
}

fn parse_source(text: &str) -> Result<SourceKind, CliError> {
    Ok(text.parse::<SourceKind>()?)
}

fn parse_orders(text: &str) -> Result<Vec<u32>, CliError> {
    let mut orders = text
        .split(',')
        .map(|t| t.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Validation(format!("cannot parse orders {text:?}")))?;
    orders.sort_unstable();
    orders.dedup();
    Ok(orders)
}

fn parse_measurement(order: u32, text: &str) -> Result<CorrelationMeasurement, CliError> {
    let bad = || CliError::Validation(format!("--g{order} expects VALUE:SIGMA, got {text:?}"));
    let (value, sigma) = text.split_once(':').ok_or_else(bad)?;
    let value: f64 = value.trim().parse().map_err(|_| bad())?;
    let sigma: f64 = sigma.trim().parse().map_err(|_| bad())?;
    Ok(CorrelationMeasurement::new(order, value, sigma)?)
}

fn detector_config(args: &DetectorArgs) -> Result<DetectorConfig, CliError> {
    let mut cfg = DetectorConfig::default();
    if let Some(e) = args.efficiency {
        cfg.efficiency = e;
    }
    if let Some(c) = args.eta0_cap {
        cfg.eta0_cap = c;
    }
    if let Some(d) = args.dark_count {
        cfg.dark_count_prob = d;
    }
    if let Some(split) = &args.split {
        let values: Vec<f64> = split
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Validation(format!("cannot parse --split {split:?}")))?;
        cfg.split_probs = values
            .try_into()
            .map_err(|_| CliError::Validation("--split needs exactly four values".into()))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn channel_model(args: &ChannelArgs) -> Result<(ChannelModel, f64), CliError> {
    let d = ChannelModel::default();
    let channel = ChannelModel {
        alpha_db_per_km: args.alpha_db_per_km.unwrap_or(d.alpha_db_per_km),
        detector_efficiency: args.detector_efficiency.unwrap_or(d.detector_efficiency),
        dark_click_prob: args.dark_click_prob.unwrap_or(d.dark_click_prob),
        misalignment: args.misalignment.unwrap_or(d.misalignment),
        vacuum_error: args.vacuum_error.unwrap_or(d.vacuum_error),
    };
    channel.validate()?;
    let margin = args.gain_margin.unwrap_or(0.0);
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(CliError::Validation(format!(
            "--gain-margin {margin} must be nonnegative"
        )));
    }
    Ok((channel, margin))
}

fn protocol_params(args: &ProtocolArgs, mu: f64) -> Result<ProtocolParams, CliError> {
    let d = ProtocolParams::default();
    let i = d.intensities;
    let params = ProtocolParams {
        p_z: args.p_z.unwrap_or(d.p_z),
        f_ec: args.f_ec.unwrap_or(d.f_ec),
        delta: args.delta.unwrap_or(d.delta),
        e0_lower: args.e0_lower.unwrap_or(d.e0_lower),
        intensities: photocert::decoy::IntensitySettings {
            u: mu,
            v: args.v.unwrap_or(i.v),
            w: args.w.unwrap_or(i.w),
            p_u: args.p_u.unwrap_or(i.p_u),
            p_v: args.p_v.unwrap_or(i.p_v),
            p_w: args.p_w.unwrap_or(i.p_w),
        },
    };
    params.validate()?;
    Ok(params)
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    pub source: String,
    pub pulses: u64,
    pub seed: u64,
    pub detector: DetectorConfig,
}

impl SimulateConfig {
    fn resolve(
        source: &Option<String>,
        pulses: Option<u64>,
        seed: Option<u64>,
        detector: &DetectorArgs,
    ) -> Result<Self, CliError> {
        let source = parse_source(&required(source, "source")?)?;
        source.validate()?;
        Ok(Self {
            source: source.to_string(),
            pulses: pulses.unwrap_or(DEFAULT_PULSES),
            seed: seed.unwrap_or(0),
            detector: detector_config(detector)?,
        })
    }
}

/// Streams the simulated records into `out` and counts them on the way.
fn run_simulation(
    cfg: &SimulateConfig,
    out: &mut dyn Write,
    label: &Path,
) -> Result<CoincidenceCounts, CliError> {
    let source = parse_source(&cfg.source)?;
    let train = simulate_pulse_train(&source, cfg.pulses, &cfg.detector, cfg.seed)?;
    let mut counter = CoincidenceCounter::new();
    for record in train {
        write_record(out, &record).map_err(|e| CliError::io(label, e))?;
        counter.push(&record)?;
    }
    Ok(counter.finish()?)
}

pub fn simulate(flags: SimulateArgs) -> Result<(), CliError> {
    let args = with_config(flags.clone(), &flags.common)?;
    let cfg = SimulateConfig::resolve(&args.source, args.pulses, args.seed, &args.detector)?;
    let dest = Destination::new(args.output.clone(), flags.common.force)?;
    let label = PathBuf::from(dest.label());
    let counts = dest.write_with(|out| run_simulation(&cfg, out, &label))?;
    dest.write_metadata(&metadata(
        "simulate",
        json!({ "simulation": to_value(&cfg), "output": dest.label() }),
        json!({ "records": counts.n_pulses, "counts": to_value(&counts) }),
    ))
}

// ---------------------------------------------------------------- estimate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsufficientOrder {
    pub order: u32,
    pub reason: String,
}

/// Output of `estimate`, input of `bound --report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub n_pulses: u64,
    pub counts: CoincidenceCounts,
    pub correlations: Vec<CorrelationMeasurement>,
    #[serde(default)]
    pub insufficient: Vec<InsufficientOrder>,
}

fn count_file(path: &Path) -> Result<CoincidenceCounts, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut counter = CoincidenceCounter::new();
    for record in RecordReader::new(BufReader::new(file)) {
        let record = record.map_err(|e| CliError::records(path, e))?;
        counter.push(&record)?;
    }
    counter
        .finish()
        .map_err(|e| CliError::InputData(format!("{}: {e}", path.display())))
}

/// Estimates every order that has counts; fails only if none does.
fn correlation_report(counts: CoincidenceCounts) -> Result<CorrelationReport, CliError> {
    let mut correlations = Vec::new();
    let mut insufficient = Vec::new();
    for order in 2..=4 {
        match estimate_correlation(&counts, order) {
            Ok(m) => correlations.push(m),
            Err(HbtError::InsufficientCounts { order, reason }) => {
                insufficient.push(InsufficientOrder { order, reason })
            }
            Err(e) => return Err(e.into()),
        }
    }
    if correlations.is_empty() {
        let reasons: Vec<String> = insufficient
            .iter()
            .map(|i| format!("g{}: {}", i.order, i.reason))
            .collect();
        return Err(CliError::InputData(format!(
            "no correlation order could be estimated ({})",
            reasons.join("; ")
        )));
    }
    Ok(CorrelationReport {
        n_pulses: counts.n_pulses,
        counts,
        correlations,
        insufficient,
    })
}

pub fn estimate(flags: EstimateArgs) -> Result<(), CliError> {
    let args = with_config(flags.clone(), &flags.common)?;
    let input = required(&args.input, "input")?;
    let dest = Destination::new(args.output.clone(), flags.common.force)?;
    let report = correlation_report(count_file(&input)?)?;
    dest.write_json(&report)?;
    dest.write_metadata(&metadata(
        "estimate",
        json!({ "input": input, "output": dest.label() }),
        json!({
            "n_pulses": report.n_pulses,
            "orders": report.correlations.iter().map(|m| m.order).collect::<Vec<_>>(),
        }),
    ))
}

// ---------------------------------------------------------------- bound

#[derive(Debug, Clone, Serialize)]
pub struct BoundConfig {
    pub measurement_source: String,
    pub measurements: Vec<CorrelationMeasurement>,
    pub mu: f64,
    pub gamma: f64,
    pub n_cut: usize,
    pub orders: Vec<u32>,
}

fn preset_measurements(preset: PresetChoice) -> Vec<CorrelationMeasurement> {
    match preset {
        PresetChoice::PaperAboveThreshold => Preset::AboveThreshold.measurements(),
        PresetChoice::PaperBelowThreshold => Preset::BelowThreshold.measurements(),
        PresetChoice::PoissonIdeal => (2..=4)
            .map(|order| CorrelationMeasurement {
                order,
                value: 1.0,
                sigma: 0.0,
            })
            .collect(),
    }
}

fn read_report(path: &Path) -> Result<CorrelationReport, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| {
        CliError::InputData(format!("{}: not a correlation report: {e}", path.display()))
    })
}

/// Keeps the requested orders (default: the longest run `2, 3, ...` that
/// was measured).
fn select_orders(
    available: &[CorrelationMeasurement],
    requested: Option<&str>,
) -> Result<Vec<CorrelationMeasurement>, CliError> {
    let chosen = match requested {
        Some(text) => {
            let orders = parse_orders(text)?;
            orders
                .iter()
                .map(|&o| {
                    available
                        .iter()
                        .find(|m| m.order == o)
                        .copied()
                        .ok_or_else(|| {
                            CliError::InputData(format!("no g{o} measurement is available"))
                        })
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        None => {
            let mut prefix = Vec::new();
            for order in 2..=4 {
                match available.iter().find(|m| m.order == order) {
                    Some(m) => prefix.push(*m),
                    None => break,
                }
            }
            if prefix.is_empty() {
                return Err(CliError::InputData("no g2 measurement is available".into()));
            }
            prefix
        }
    };
    Ok(chosen)
}

impl BoundConfig {
    fn resolve(args: &BoundArgs) -> Result<Self, CliError> {
        let manual: Vec<(u32, &String)> = [(2, &args.g2), (3, &args.g3), (4, &args.g4)]
            .into_iter()
            .filter_map(|(o, v)| v.as_ref().map(|v| (o, v)))
            .collect();
        let sources =
            args.preset.is_some() as u8 + args.report.is_some() as u8 + (!manual.is_empty()) as u8;
        if sources != 1 {
            return Err(CliError::Validation(
                "give exactly one of --preset, --report or --g2/--g3/--g4".into(),
            ));
        }
        let (label, available) = if let Some(p) = args.preset {
            (
                format!("preset {}", to_value(&p).as_str().unwrap_or("")),
                preset_measurements(p),
            )
        } else if let Some(path) = &args.report {
            (
                format!("report {}", path.display()),
                read_report(path)?.correlations,
            )
        } else {
            let ms = manual
                .iter()
                .map(|(o, v)| parse_measurement(*o, v))
                .collect::<Result<Vec<_>, _>>()?;
            ("command line".to_string(), ms)
        };
        let measurements = select_orders(&available, args.orders.as_deref())?;
        Ok(Self {
            measurement_source: label,
            orders: measurements.iter().map(|m| m.order).collect(),
            measurements,
            mu: args.mu.unwrap_or(DEFAULT_MU),
            gamma: args.gamma.unwrap_or(DEFAULT_GAMMA),
            n_cut: args.n_cut.unwrap_or(DEFAULT_N_CUT),
        })
    }

    fn bounds(&self) -> Result<ProbabilityBounds, CliError> {
        let constraints =
            CorrelationConstraints::new(self.measurements.clone(), self.gamma, self.mu)?;
        Ok(bound_photon_probabilities(&constraints, self.n_cut)?)
    }
}

pub fn bound(flags: BoundArgs) -> Result<(), CliError> {
    let args = with_config(flags.clone(), &flags.common)?;
    let cfg = BoundConfig::resolve(&args)?;
    let dest = Destination::new(args.output.clone(), flags.common.force)?;
    let bounds = cfg.bounds()?;
    dest.write_json(&bounds)?;
    dest.write_metadata(&metadata(
        "bound",
        json!({ "bound": to_value(&cfg), "output": dest.label(), "mass_floor": photocert::stats_bounds::MASS_FLOOR }),
        json!({ "epsilon_total": bounds.epsilon_total }),
    ))
}

// ---------------------------------------------------------------- keyrate

#[derive(Debug, Clone, Serialize)]
pub struct KeyrateConfig {
    pub scenario: String,
    pub prepared_source: String,
    pub bounds: Option<ProbabilityBounds>,
    pub n_cut: usize,
    pub gain_margin: f64,
    pub grid: Vec<f64>,
    pub channel: ChannelModel,
    pub protocol: ProtocolParams,
    /// The channel model has one error rate, used for both bases.
    pub same_error_rate_both_bases: bool,
}

impl KeyrateConfig {
    fn scenario(&self) -> Result<KeyRateScenario, CliError> {
        let prepared = parse_source(&self.prepared_source)?;
        let mut scenario = match &self.bounds {
            Some(b) => KeyRateScenario::new(prepared, SignalKnowledge::Bounds(b.clone())),
            None => KeyRateScenario::poisson_ideal(self.protocol.intensities.u)?,
        };
        scenario.n_cut = self.n_cut;
        scenario.gain_margin = self.gain_margin;
        Ok(scenario)
    }

    fn scan(&self) -> Result<Vec<KeyRatePoint>, CliError> {
        Ok(rate_vs_distance_scan(
            &self.scenario()?,
            &self.channel,
            &self.protocol,
            &self.grid,
        )?)
    }
}

fn resolve_keyrate(args: &KeyrateArgs) -> Result<KeyrateConfig, CliError> {
    let n_cut = args.n_cut.unwrap_or(DEFAULT_N_CUT);
    let (channel, gain_margin) = channel_model(&args.channel)?;
    let grid = parse_distance_grid(args.grid.as_deref().unwrap_or(DEFAULT_GRID))?;
    let finish = |scenario: String,
                  mu: f64,
                  prepared: SourceKind,
                  bounds|
     -> Result<KeyrateConfig, CliError> {
        Ok(KeyrateConfig {
            scenario,
            prepared_source: prepared.to_string(),
            bounds,
            n_cut,
            gain_margin,
            grid: grid.clone(),
            channel,
            protocol: protocol_params(&args.protocol, mu)?,
            same_error_rate_both_bases: true,
        })
    };
    match (args.preset, &args.bounds) {
        (Some(_), Some(_)) | (None, None) => Err(CliError::Validation(
            "give exactly one of --preset or --bounds".into(),
        )),
        (Some(PresetChoice::PoissonIdeal), None) => {
            if args.orders.is_some() || args.gamma.is_some() || args.source.is_some() {
                return Err(CliError::Validation(
                    "--orders, --gamma and --source do not apply to the poisson-ideal preset"
                        .into(),
                ));
            }
            let mu = args.mu.unwrap_or(DEFAULT_MU);
            finish(
                "poisson-ideal".into(),
                mu,
                SourceKind::Poisson { mean: mu },
                None,
            )
        }
        (Some(choice), None) => {
            if args.source.is_some() {
                return Err(CliError::Validation(
                    "--source only applies with --bounds".into(),
                ));
            }
            let preset = match choice {
                PresetChoice::PaperAboveThreshold => Preset::AboveThreshold,
                _ => Preset::BelowThreshold,
            };
            let bound_cfg = BoundConfig::resolve(&BoundArgs {
                preset: Some(choice),
                mu: args.mu,
                orders: args.orders.clone(),
                gamma: args.gamma,
                n_cut: Some(n_cut),
                ..Default::default()
            })?;
            let bounds = bound_cfg.bounds()?;
            let label = format!("{} orders {:?}", preset.name(), bound_cfg.orders);
            finish(
                label,
                bound_cfg.mu,
                preset.prepared_source(bound_cfg.mu),
                Some(bounds),
            )
        }
        (None, Some(path)) => {
            if args.orders.is_some() || args.gamma.is_some() {
                return Err(CliError::Validation(
                    "--orders and --gamma do not apply with --bounds".into(),
                ));
            }
            let bounds = read_bounds(path)?;
            if let Some(mu) = args.mu {
                if (mu - bounds.mu).abs() > 1e-12 {
                    return Err(CliError::Validation(format!(
                        "--mu {mu} differs from the bounds' mu {}",
                        bounds.mu
                    )));
                }
            }
            let mu = bounds.mu;
            let prepared = match &args.source {
                Some(s) => parse_source(s)?,
                None => SourceKind::Poisson { mean: mu },
            };
            finish(
                format!("bounds {}", path.display()),
                mu,
                prepared,
                Some(bounds),
            )
        }
    }
}

fn read_bounds(path: &Path) -> Result<ProbabilityBounds, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::InputData(format!("{}: not a bounds file: {e}", path.display())))
}

fn scan_summary(points: &[KeyRatePoint]) -> serde_json::Value {
    json!({
        "points": points.len(),
        "max_positive_distance_km": max_positive_distance(points),
        "e1_clamped_at_km": points.iter().filter(|p| p.e1_clamped).map(|p| p.distance_km).collect::<Vec<_>>(),
        "uncertified_at_km": points.iter().filter(|p| !p.single_photons_certified).map(|p| p.distance_km).collect::<Vec<_>>(),
    })
}

pub fn keyrate(flags: KeyrateArgs) -> Result<(), CliError> {
    let args = with_config(flags.clone(), &flags.common)?;
    let cfg = resolve_keyrate(&args)?;
    let dest = Destination::new(args.output.clone(), flags.common.force)?;
    let points = cfg.scan()?;
    let label = PathBuf::from(dest.label());
    dest.write_with(|out| write_scan_csv(out, &points).map_err(|e| CliError::io(&label, e)))?;
    dest.write_metadata(&metadata(
        "keyrate",
        json!({ "keyrate": to_value(&cfg), "output": dest.label() }),
        scan_summary(&points),
    ))
}

// ---------------------------------------------------------------- pipeline

pub const PIPELINE_FILES: [&str; 5] = [
    "records.txt",
    "correlations.json",
    "bounds.json",
    "keyrate.csv",
    "pipeline.meta.json",
];

pub fn pipeline(flags: PipelineArgs) -> Result<(), CliError> {
    let args = with_config(flags.clone(), &flags.common)?;
    let sim = SimulateConfig::resolve(&args.source, args.pulses, args.seed, &args.detector)?;
    let source = parse_source(&sim.source)?;
    let mu = args.mu.unwrap_or_else(|| source.mean());
    let (channel, gain_margin) = channel_model(&args.channel)?;
    let protocol = protocol_params(&args.protocol, mu)?;
    let grid = parse_distance_grid(args.grid.as_deref().unwrap_or(DEFAULT_GRID))?;
    let n_cut = args.n_cut.unwrap_or(DEFAULT_N_CUT);
    let gamma = args.gamma.unwrap_or(DEFAULT_GAMMA);

    let dir = required(&args.out_dir, "out-dir")?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let paths: Vec<PathBuf> = PIPELINE_FILES.iter().map(|f| dir.join(f)).collect();
    ensure_writable(paths.iter().map(PathBuf::as_path), flags.common.force)?;
    let [records, correlations, bounds_path, csv, meta] =
        <[PathBuf; 5]>::try_from(paths).expect("five pipeline files");

    Destination::new(Some(records.clone()), true)?
        .write_with(|out| run_simulation(&sim, out, &records))?;
    let report = correlation_report(count_file(&records)?)?;
    write_json_file(&correlations, &report)?;

    let measurements = select_orders(&report.correlations, args.orders.as_deref())?;
    let bound_cfg = BoundConfig {
        measurement_source: format!("report {}", correlations.display()),
        orders: measurements.iter().map(|m| m.order).collect(),
        measurements,
        mu,
        gamma,
        n_cut,
    };
    let bounds = bound_cfg.bounds()?;
    write_json_file(&bounds_path, &bounds)?;

    let key_cfg = KeyrateConfig {
        scenario: format!("bounds {}", bounds_path.display()),
        prepared_source: sim.source.clone(),
        bounds: Some(bounds),
        n_cut,
        gain_margin,
        grid,
        channel,
        protocol,
        same_error_rate_both_bases: true,
    };
    let points = key_cfg.scan()?;
    Destination::new(Some(csv.clone()), true)?
        .write_with(|out| write_scan_csv(out, &points).map_err(|e| CliError::io(&csv, e)))?;

    write_json_file(
        &meta,
        &metadata(
            "pipeline",
            json!({
                "simulation": to_value(&sim),
                "bound": to_value(&bound_cfg),
                "keyrate": to_value(&key_cfg),
                "out_dir": dir,
            }),
            json!({
                "records": report.n_pulses,
                "estimated_orders": report.correlations.iter().map(|m| m.order).collect::<Vec<_>>(),
                "insufficient": to_value(&report.insufficient),
                "keyrate": scan_summary(&points),
            }),
        ),
    )?;
    Ok(())
}
