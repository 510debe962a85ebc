//! Monte Carlo model of a four-detector Hanbury Brown-Twiss arrangement.
//!
//! A pulsed source is split onto four threshold detectors of low efficiency.
//! Every pulse slot produces one [`DetectionRecord`]; coincidences are counted
//! at zero delay (same slot) and turned into `g_2`, `g_3`, `g_4` estimates.

mod counts;
mod estimate;
mod records;
mod simulator;

pub use counts::{count_coincidences, CoincidenceCounter, CoincidenceCounts, PAIRS, TRIPLES};
pub use estimate::{estimate_correlation, estimate_correlations};
pub use records::{parse_record_line, write_record, write_records, RecordError, RecordReader};
pub use simulator::{simulate_counts, simulate_pulse_train, PulseTrain, BATCH_PULSES};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::photon_model::ModelError;

pub const NUM_DETECTORS: usize = 4;

/// Default ceiling on the per-photon detection efficiency.
pub const DEFAULT_ETA0_CAP: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HbtError {
    #[error("invalid detector configuration: {0}")]
    InvalidConfig(String),
    #[error("the detection record stream is empty")]
    EmptyStream,
    #[error("pulse index {index} does not follow {previous}")]
    NonIncreasingIndex { previous: u64, index: u64 },
    #[error("not enough counts to estimate g{order}: {reason}")]
    InsufficientCounts { order: u32, reason: String },
    #[error("correlation order must be 2, 3 or 4, got {0}")]
    UnsupportedOrder(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Probability that a photon routed to a detector is registered.
    pub efficiency: f64,
    /// Upper limit on `efficiency` for the linear-response regime.
    pub eta0_cap: f64,
    /// Probability that a photon is routed to each detector.
    pub split_probs: [f64; NUM_DETECTORS],
    /// Spurious click probability per pulse and detector.
    pub dark_count_prob: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            efficiency: 0.005,
            eta0_cap: DEFAULT_ETA0_CAP,
            split_probs: [0.25; NUM_DETECTORS],
            dark_count_prob: 0.0,
        }
    }
}

impl DetectorConfig {
    pub fn with_efficiency(efficiency: f64) -> Self {
        Self {
            efficiency,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), HbtError> {
        let bad = |msg: String| Err(HbtError::InvalidConfig(msg));
        if !(self.eta0_cap > 0.0 && self.eta0_cap <= 1.0) {
            return bad(format!("eta0 cap {} is outside (0, 1]", self.eta0_cap));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= self.eta0_cap) {
            return bad(format!(
                "efficiency {} is outside (0, {}]",
                self.efficiency, self.eta0_cap
            ));
        }
        if self
            .split_probs
            .iter()
            .any(|p| !(p.is_finite() && *p >= 0.0))
        {
            return bad(format!(
                "split probabilities {:?} must be nonnegative",
                self.split_probs
            ));
        }
        let total: f64 = self.split_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("split probabilities sum to {total}, not 1"));
        }
        if !(0.0..1.0).contains(&self.dark_count_prob) {
            return bad(format!(
                "dark count probability {} is outside [0, 1)",
                self.dark_count_prob
            ));
        }
        Ok(())
    }
}

/// Click pattern of the four detectors in one pulse slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub pulse_index: u64,
    pub clicks: [bool; NUM_DETECTORS],
}

impl DetectionRecord {
    pub fn from_mask(pulse_index: u64, mask: u8) -> Self {
        let mut clicks = [false; NUM_DETECTORS];
        for (d, c) in clicks.iter_mut().enumerate() {
            *c = mask & (1 << d) != 0;
        }
        Self {
            pulse_index,
            clicks,
        }
    }

    /// Bit `d` set when detector `d` clicked.
    pub fn mask(&self) -> u8 {
        self.clicks
            .iter()
            .enumerate()
            .fold(0, |m, (d, &c)| if c { m | (1 << d) } else { m })
    }
}

/// A measured (or estimated) normalised correlation `g_m` with its standard
/// deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMeasurement {
    pub order: u32,
    pub value: f64,
    pub sigma: f64,
}

impl CorrelationMeasurement {
    pub fn new(order: u32, value: f64, sigma: f64) -> Result<Self, HbtError> {
        if !(2..=4).contains(&order) {
            return Err(HbtError::UnsupportedOrder(order));
        }
        if !(value.is_finite() && value >= 0.0 && sigma.is_finite() && sigma >= 0.0) {
            return Err(HbtError::InvalidConfig(format!(
                "g{order} = {value} +/- {sigma} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            order,
            value,
            sigma,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::default().validate().is_ok());
        assert!(DetectorConfig::with_efficiency(0.05).validate().is_err());
        assert!(DetectorConfig::with_efficiency(0.0).validate().is_err());
        let skewed = DetectorConfig {
            split_probs: [0.4, 0.2, 0.2, 0.2],
            ..DetectorConfig::default()
        };
        assert!(skewed.validate().is_ok());
        let broken = DetectorConfig {
            split_probs: [0.4, 0.4, 0.2, 0.2],
            ..DetectorConfig::default()
        };
        assert!(broken.validate().is_err());
    }

    #[test]
    fn mask_round_trip() {
        for mask in 0..16u8 {
            assert_eq!(DetectionRecord::from_mask(3, mask).mask(), mask);
        }
        let r = DetectionRecord {
            pulse_index: 0,
            clicks: [true, false, false, true],
        };
        assert_eq!(r.mask(), 0b1001);
    }

    #[test]
    fn measurement_validation() {
        assert!(CorrelationMeasurement::new(2, 1.0, 0.1).is_ok());
        assert!(CorrelationMeasurement::new(5, 1.0, 0.1).is_err());
        assert!(CorrelationMeasurement::new(2, -1.0, 0.1).is_err());
        assert!(CorrelationMeasurement::new(2, 1.0, -0.1).is_err());
    }
}
