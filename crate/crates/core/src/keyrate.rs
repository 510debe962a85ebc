//! Fibre channel model and the decoy-state BB84 key rate
//!
//! ```text
//! R = p_u p_Z^2 { p1_lo y1_lo [1 - h(e1_hi)] - f Q_Z h(E_Z) - Delta }
//! ```
//!
//! evaluated from photon-number bounds and simulated channel data.
//!
//! The channel is the usual decoy-state model: a photon survives the fibre
//! and is detected with `eta = eta_det 10^(-alpha L / 10)`, an `n`-photon
//! pulse clicks with `y_n = 1 - (1 - Y0)(1 - eta)^n`, and it produces an
//! error with `b_n = e0 Y0 + e_d (1 - (1 - eta)^n)` (capped at `y_n`).

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoy::{
    self, bound_error_rate_e1, bound_yields_with_envelopes, intensity_envelopes, DecoyError,
    IntensityGains, IntensitySettings, Interval, ObservedGains, PhotonProbabilityEnvelope,
};
use crate::photon_model::{poisson_distribution, ModelError, PhotonNumberDistribution, SourceKind};
use crate::stats_bounds::{ProbabilityBounds, DEFAULT_N_CUT};

pub const CSV_HEADER: &str = "distance_km,Q_Z,E_Z,p1_lower,y1_lower,e1_upper,R";
pub const CSV_SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeyRateError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),
    #[error("invalid distance grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Decoy(#[from] DecoyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `-x log2 x - (1 - x) log2 (1 - x)`, zero at both ends.
pub fn binary_entropy(x: f64) -> Result<f64, KeyRateError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(KeyRateError::Domain(format!("binary entropy of {x}")));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelModel {
    pub alpha_db_per_km: f64,
    pub detector_efficiency: f64,
    /// Dark-click probability per pulse, `Y0`.
    pub dark_click_prob: f64,
    /// Misalignment error probability `e_d`.
    pub misalignment: f64,
    /// Error probability of a dark click, `e0`.
    pub vacuum_error: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            alpha_db_per_km: 0.2,
            detector_efficiency: 0.1,
            dark_click_prob: 1e-5,
            misalignment: 0.01,
            vacuum_error: 0.5,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<(), KeyRateError> {
        let probs = [
            ("detector_efficiency", self.detector_efficiency),
            ("dark_click_prob", self.dark_click_prob),
            ("misalignment", self.misalignment),
            ("vacuum_error", self.vacuum_error),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(KeyRateError::InvalidChannel(format!("{name} = {p}")));
            }
        }
        if !(self.alpha_db_per_km >= 0.0 && self.alpha_db_per_km.is_finite()) {
            return Err(KeyRateError::InvalidChannel(format!(
                "alpha = {}",
                self.alpha_db_per_km
            )));
        }
        Ok(())
    }

    /// Single-photon transmission and detection probability over `distance_km`.
    pub fn transmittance(&self, distance_km: f64) -> f64 {
        self.detector_efficiency * 10f64.powf(-self.alpha_db_per_km * distance_km / 10.0)
    }

    pub fn yield_n(&self, n: usize, eta: f64) -> f64 {
        1.0 - (1.0 - self.dark_click_prob) * (1.0 - eta).powi(n as i32)
    }

    pub fn error_gain_n(&self, n: usize, eta: f64) -> f64 {
        let signal = 1.0 - (1.0 - eta).powi(n as i32);
        (self.vacuum_error * self.dark_click_prob + self.misalignment * signal)
            .min(self.yield_n(n, eta))
    }

    /// Single-photon error rate `b_1 / y_1` of the model.
    pub fn error_rate_n(&self, n: usize, eta: f64) -> f64 {
        let y = self.yield_n(n, eta);
        if y > 0.0 {
            self.error_gain_n(n, eta) / y
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolParams {
    /// Probability of the key basis.
    pub p_z: f64,
    /// Error-correction inefficiency.
    pub f_ec: f64,
    /// Finite-size penalty per pulse.
    pub delta: f64,
    /// Lower bound on the dark-click error rate; 0 is always sound.
    pub e0_lower: f64,
    pub intensities: IntensitySettings,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            p_z: 0.9,
            f_ec: 1.16,
            delta: 0.0,
            e0_lower: 0.0,
            intensities: IntensitySettings::default(),
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<(), KeyRateError> {
        let bad = |m: String| Err(KeyRateError::InvalidParams(m));
        if !(self.p_z > 0.0 && self.p_z < 1.0) {
            return bad(format!("p_z = {} is not in (0, 1)", self.p_z));
        }
        if !(self.f_ec >= 1.0 && self.f_ec.is_finite()) {
            return bad(format!("f = {} is below 1", self.f_ec));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta = {} is negative", self.delta));
        }
        if !(0.0..=0.5).contains(&self.e0_lower) {
            return bad(format!("e0_lower = {} is not in [0, 0.5]", self.e0_lower));
        }
        self.intensities.validate()?;
        Ok(())
    }
}

/// Right-hand side of the key-rate bound; may be negative.
pub fn secure_key_rate(
    params: &ProtocolParams,
    p1_lower: f64,
    y1_lower: f64,
    e1_upper: f64,
    q_z: f64,
    e_z: f64,
) -> Result<f64, KeyRateError> {
    for (name, x) in [
        ("p1_lower", p1_lower),
        ("y1_lower", y1_lower),
        ("Q_Z", q_z),
        ("E_Z", e_z),
    ] {
        if !(0.0..=1.0).contains(&x) {
            return Err(KeyRateError::Domain(format!("{name} = {x}")));
        }
    }
    if !(0.0..=decoy::E1_CAP).contains(&e1_upper) {
        return Err(KeyRateError::Domain(format!("e1_upper = {e1_upper}")));
    }
    let privacy = p1_lower * y1_lower * (1.0 - binary_entropy(e1_upper)?);
    let correction = params.f_ec * q_z * binary_entropy(e_z)?;
    let prefactor = params.intensities.p_u * params.p_z * params.p_z;
    Ok(prefactor * (privacy - correction - params.delta))
}

/// Photon-number distributions actually prepared for each intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySources {
    pub signal: PhotonNumberDistribution,
    pub decoy: PhotonNumberDistribution,
    pub vacuum: PhotonNumberDistribution,
}

impl IntensitySources {
    /// `signal` at whatever statistics it has; decoy and vacuum Poissonian.
    pub fn new(signal: &SourceKind, settings: &IntensitySettings) -> Result<Self, KeyRateError> {
        settings.validate()?;
        let poisson = |mean: f64| -> Result<PhotonNumberDistribution, ModelError> {
            if mean == 0.0 {
                PhotonNumberDistribution::vacuum(DEFAULT_N_CUT)
            } else {
                poisson_distribution(mean, DEFAULT_N_CUT)
            }
        };
        Ok(Self {
            signal: signal.auto_distribution(DEFAULT_N_CUT)?,
            decoy: poisson(settings.v)?,
            vacuum: poisson(settings.w)?,
        })
    }
}

/// Gains the channel model predicts for every intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelObservation {
    pub gains: ObservedGains,
    /// Signal gain in the key basis.
    pub q_z: f64,
    /// Signal error rate in the key basis.
    pub e_z: f64,
    /// Set when the signal gain is zero and `E_Z` was reported as 0.
    pub zero_gain: bool,
}

/// Expected gains over the prepared distributions, as intervals widened by
/// `relative_margin` (zero width by default).
pub fn simulate_channel(
    sources: &IntensitySources,
    channel: &ChannelModel,
    distance_km: f64,
    relative_margin: f64,
) -> Result<ChannelObservation, KeyRateError> {
    channel.validate()?;
    if !(distance_km >= 0.0 && distance_km.is_finite()) {
        return Err(KeyRateError::Domain(format!("distance {distance_km} km")));
    }
    if !(relative_margin >= 0.0 && relative_margin.is_finite()) {
        return Err(KeyRateError::Domain(format!(
            "gain margin {relative_margin}"
        )));
    }
    let eta = channel.transmittance(distance_km);
    let expected = |dist: &PhotonNumberDistribution| -> (f64, f64) {
        let probs = dist.probs();
        let y: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(n, p)| p * channel.yield_n(n, eta))
            .collect();
        let b: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(n, p)| p * channel.error_gain_n(n, eta))
            .collect();
        (
            y.iter().sum::<f64>().min(1.0),
            b.iter().sum::<f64>().min(1.0),
        )
    };
    let observe = |dist: &PhotonNumberDistribution| {
        let (y, b) = expected(dist);
        IntensityGains {
            gain: Interval::around(y, relative_margin),
            error_gain: Interval::around(b.min(y), relative_margin),
        }
    };
    let (q_z, b_z) = expected(&sources.signal);
    let zero_gain = q_z <= 0.0;
    Ok(ChannelObservation {
        gains: ObservedGains {
            signal: observe(&sources.signal),
            decoy: observe(&sources.decoy),
            vacuum: observe(&sources.vacuum),
        },
        q_z,
        e_z: if zero_gain { 0.0 } else { b_z / q_z },
        zero_gain,
    })
}

/// What the key-rate calculation is allowed to assume about the signal
/// photon-number distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalKnowledge {
    /// Bounds certified from correlation measurements.
    Bounds(ProbabilityBounds),
    /// The exact distribution (an idealised reference).
    Exact(PhotonNumberDistribution),
}

impl SignalKnowledge {
    pub fn envelope(&self, n_cut: usize) -> Result<PhotonProbabilityEnvelope, DecoyError> {
        match self {
            SignalKnowledge::Bounds(b) => PhotonProbabilityEnvelope::from_bounds(b, n_cut),
            SignalKnowledge::Exact(d) => PhotonProbabilityEnvelope::exact(d, n_cut),
        }
    }

    pub fn p_lower(&self, n: usize) -> f64 {
        match self {
            SignalKnowledge::Bounds(b) => b.lower[n],
            SignalKnowledge::Exact(d) => d.prob(n),
        }
    }
}

/// A prepared source and what is known about it.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateScenario {
    pub prepared: SourceKind,
    pub knowledge: SignalKnowledge,
    pub n_cut: usize,
    pub gain_margin: f64,
}

impl KeyRateScenario {
    pub fn new(prepared: SourceKind, knowledge: SignalKnowledge) -> Self {
        Self {
            prepared,
            knowledge,
            n_cut: DEFAULT_N_CUT,
            gain_margin: 0.0,
        }
    }

    /// Poisson source whose distribution is assumed known exactly.
    pub fn poisson_ideal(mean: f64) -> Result<Self, KeyRateError> {
        let dist = poisson_distribution(mean, DEFAULT_N_CUT)?;
        Ok(Self::new(
            SourceKind::Poisson { mean },
            SignalKnowledge::Exact(dist),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRatePoint {
    pub distance_km: f64,
    #[serde(rename = "Q_Z")]
    pub q_z: f64,
    #[serde(rename = "E_Z")]
    pub e_z: f64,
    pub p1_lower: f64,
    pub y1_lower: f64,
    pub e1_upper: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub e1_clamped: bool,
    /// False when `p1_lower y1_lower = 0`; `e1_upper` is then 0.5.
    pub single_photons_certified: bool,
    pub zero_gain: bool,
}

/// Simulates the channel at one distance and evaluates the key rate.
pub fn evaluate_point(
    scenario: &KeyRateScenario,
    sources: &IntensitySources,
    channel: &ChannelModel,
    params: &ProtocolParams,
    distance_km: f64,
) -> Result<KeyRatePoint, KeyRateError> {
    let obs = simulate_channel(sources, channel, distance_km, scenario.gain_margin)?;
    let envelopes = intensity_envelopes(
        scenario.knowledge.envelope(scenario.n_cut)?,
        &params.intensities,
    )?;
    let yields = bound_yields_with_envelopes(&obs.gains, &envelopes)?;
    let p0_lower = scenario.knowledge.p_lower(0);
    let p1_lower = scenario.knowledge.p_lower(1);
    let (e1_upper, e1_clamped, certified) = match bound_error_rate_e1(
        &obs.gains,
        p0_lower,
        yields.y0_lower,
        params.e0_lower,
        p1_lower,
        yields.y1_lower,
    ) {
        Ok(b) => (b.e1_upper, b.clamped, true),
        Err(DecoyError::DegenerateDenominator) => (decoy::E1_CAP, true, false),
        Err(e) => return Err(e.into()),
    };
    let r = secure_key_rate(
        params,
        p1_lower,
        yields.y1_lower,
        e1_upper,
        obs.q_z,
        obs.e_z,
    )?;
    Ok(KeyRatePoint {
        distance_km,
        q_z: obs.q_z,
        e_z: obs.e_z,
        p1_lower,
        y1_lower: yields.y1_lower,
        e1_upper,
        r,
        e1_clamped,
        single_photons_certified: certified,
        zero_gain: obs.zero_gain,
    })
}

/// Key rate at every grid distance, in grid order.
pub fn rate_vs_distance_scan(
    scenario: &KeyRateScenario,
    channel: &ChannelModel,
    params: &ProtocolParams,
    grid: &[f64],
) -> Result<Vec<KeyRatePoint>, KeyRateError> {
    channel.validate()?;
    params.validate()?;
    let sources = IntensitySources::new(&scenario.prepared, &params.intensities)?;
    grid.par_iter()
        .map(|&d| evaluate_point(scenario, &sources, channel, params, d))
        .collect()
}

/// `start, start + step, ..., stop` (inclusive when `stop` is on the grid).
pub fn distance_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, KeyRateError> {
    if !(start >= 0.0 && stop >= start && step > 0.0 && stop.is_finite()) {
        return Err(KeyRateError::InvalidGrid(format!("{start}:{stop}:{step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Parses `start:stop:step`.
pub fn parse_distance_grid(text: &str) -> Result<Vec<f64>, KeyRateError> {
    let bad = || KeyRateError::InvalidGrid(text.to_string());
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [start, stop, step] => distance_grid(start, stop, step),
        _ => Err(bad()),
    }
}

/// Formats like C's `%.{digits}g`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exponent < -4 || exponent >= digits as i32 {
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exponent.abs())
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

pub fn write_scan_csv<W: Write + ?Sized>(out: &mut W, points: &[KeyRatePoint]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in points {
        let row: Vec<String> = [
            p.distance_km,
            p.q_z,
            p.e_z,
            p.p1_lower,
            p.y1_lower,
            p.e1_upper,
            p.r,
        ]
        .iter()
        .map(|&x| format_significant(x, CSV_SIGNIFICANT_DIGITS))
        .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Largest grid distance up to which every point has a positive rate.
pub fn max_positive_distance(points: &[KeyRatePoint]) -> Option<f64> {
    points
        .iter()
        .take_while(|p| p.r > 0.0)
        .last()
        .map(|p| p.distance_km)
}
