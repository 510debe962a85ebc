//! Reference correlation measurements of a gain-switched DFB laser diode
//! measured through a four-detector HBT arrangement.
//!
//! `AboveThreshold` is the normal operating point (about 6.5 mA DC bias) and
//! is nearly Poissonian; `BelowThreshold` (about 4.0 mA) is strongly bunched,
//! close to thermal light.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::hbt::CorrelationMeasurement;
use crate::photon_model::SourceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    AboveThreshold,
    BelowThreshold,
}

const ABOVE: [(u32, f64, f64); 3] = [(2, 1.0041, 0.0039), (3, 1.0059, 0.0056), (4, 1.099, 0.049)];
const BELOW: [(u32, f64, f64); 3] = [(2, 1.6985, 0.0138), (3, 4.21, 0.13), (4, 17.11, 2.84)];

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::AboveThreshold, Preset::BelowThreshold];

    /// `g_2, g_3, g_4` with their standard deviations.
    pub fn measurements(self) -> Vec<CorrelationMeasurement> {
        let table = match self {
            Preset::AboveThreshold => ABOVE,
            Preset::BelowThreshold => BELOW,
        };
        table
            .iter()
            .map(|&(order, value, sigma)| CorrelationMeasurement {
                order,
                value,
                sigma,
            })
            .collect()
    }

    /// Measurements restricted to the given orders.
    pub fn measurements_for(self, orders: &[u32]) -> Vec<CorrelationMeasurement> {
        self.measurements()
            .into_iter()
            .filter(|m| orders.contains(&m.order))
            .collect()
    }

    /// A synthetic source consistent with the preset, used to generate
    /// channel data: coherent light above threshold; below threshold an
    /// equal-mean thermal/Poisson mixture whose thermal weight `g_2 - 1`
    /// reproduces the measured `g_2`.
    pub fn prepared_source(self, mean: f64) -> SourceKind {
        match self {
            Preset::AboveThreshold => SourceKind::Poisson { mean },
            Preset::BelowThreshold => {
                let thermal = BELOW[0].1 - 1.0;
                SourceKind::Mixture {
                    components: vec![
                        (thermal, SourceKind::Thermal { mean }),
                        (1.0 - thermal, SourceKind::Poisson { mean }),
                    ],
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::AboveThreshold => "paper-above-threshold",
            Preset::BelowThreshold => "paper-below-threshold",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-above-threshold" | "above-threshold" => Ok(Preset::AboveThreshold),
            "paper-below-threshold" | "below-threshold" => Ok(Preset::BelowThreshold),
            _ => Err(format!("unknown preset {s:?}")),
        }
    }
}
