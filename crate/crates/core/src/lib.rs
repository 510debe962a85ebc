//! Certification of the photon-number statistics of pulsed light sources.
//!
//! The crate covers the whole chain from raw detector clicks to a secure key
//! rate:
//!
//! - [`photon_model`]: closed-form photon-number distributions and their
//!   zero-delay correlation functions `g_m`.
//! - [`hbt`]: a Monte Carlo four-detector Hanbury Brown-Twiss setup, the
//!   click-record file format, coincidence counting and `g_m` estimation.
//! - [`lp`]: a small dense simplex solver.
//! - [`stats_bounds`]: worst-case bounds on `p_0 ... p_3` from measured `g_m`.
//! - [`decoy`]: decoy-state yield and single-photon error-rate bounds.
//! - [`keyrate`]: channel model, secret-key fraction and distance scans.
//! - [`presets`]: reference correlation measurements of a laser diode driven
//!   above and below threshold.

#![allow(clippy::needless_range_loop)]

pub mod decoy;
pub mod hbt;
pub mod keyrate;
pub mod lp;
pub mod photon_model;
pub mod presets;
pub mod stats_bounds;

pub use photon_model::{PhotonNumberDistribution, SourceKind};

/// Crate version recorded in every output metadata block.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
