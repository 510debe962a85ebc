//! Photon-number distributions of pulsed light sources and their
//! zero-delay normalised correlation functions.
//!
//! A distribution is the diagonal of a phase-randomised state,
//! `p_0 ... p_{n_cut}`, truncated at a finite photon number. Truncation may
//! only remove probability mass: the stored probabilities sum to at most one
//! and at least `1 - 1e-9`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest probability mass a closed-form constructor may drop beyond `n_cut`.
pub const TAIL_TOLERANCE: f64 = 1e-9;

/// Tolerance on mixture weights summing to one.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

// Rounding slack when checking that the stored mass does not exceed one.
const MASS_ROUNDING: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("truncation at n_cut = {n_cut} drops tail mass {tail:e} (limit {TAIL_TOLERANCE:e})")]
    TruncationTooSevere { n_cut: usize, tail: f64 },
    #[error("mean photon number must be finite and positive, got {0}")]
    InvalidMean(f64),
    #[error("n_cut must be at least 1, got {0}")]
    InvalidCutoff(usize),
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("mixture has {components} components but {weights} weights")]
    MismatchedLengths { components: usize, weights: usize },
    #[error("mixture weights must be positive and sum to 1: {0}")]
    BadWeights(String),
    #[error("mixture components use different n_cut values")]
    MismatchedCutoff,
    #[error("correlation functions are undefined for a source with zero mean photon number")]
    ZeroMeanSource,
    #[error("correlation order must be 2, 3 or 4, got {0}")]
    UnsupportedOrder(u32),
    #[error("cannot parse source description {0:?}")]
    ParseSource(String),
}

/// Probabilities `p_0 ... p_{n_cut}` of emitting `n` photons in a pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
}

impl PhotonNumberDistribution {
    /// Validates and wraps `probs`, indexed by photon number.
    pub fn new(probs: Vec<f64>) -> Result<Self, ModelError> {
        if probs.len() < 2 {
            return Err(ModelError::InvalidCutoff(probs.len().saturating_sub(1)));
        }
        if let Some((n, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && (0.0..=1.0).contains(*p)))
        {
            return Err(ModelError::InvalidProbabilities(format!(
                "p[{n}] = {p} is outside [0, 1]"
            )));
        }
        let total = compensated_sum(probs.iter().copied());
        if !(1.0 - TAIL_TOLERANCE..=1.0 + MASS_ROUNDING).contains(&total) {
            return Err(ModelError::InvalidProbabilities(format!(
                "total mass {total} is outside [1 - {TAIL_TOLERANCE:e}, 1]"
            )));
        }
        Ok(Self { probs })
    }

    /// All mass on the vacuum.
    pub fn vacuum(n_cut: usize) -> Result<Self, ModelError> {
        if n_cut < 1 {
            return Err(ModelError::InvalidCutoff(n_cut));
        }
        let mut probs = vec![0.0; n_cut + 1];
        probs[0] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_cut(&self) -> usize {
        self.probs.len() - 1
    }

    /// `p_n`, zero beyond the cutoff.
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        mean_photon_number(self)
    }

    /// Cumulative distribution, used for inverse-transform sampling.
    pub(crate) fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

impl TryFrom<Vec<f64>> for PhotonNumberDistribution {
    type Error = ModelError;

    fn try_from(probs: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(probs)
    }
}

impl From<PhotonNumberDistribution> for Vec<f64> {
    fn from(dist: PhotonNumberDistribution) -> Self {
        dist.probs
    }
}

fn check_mean(mu: f64) -> Result<(), ModelError> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidMean(mu))
    }
}

/// Coherent (Poissonian) light, `p_n = e^{-mu} mu^n / n!`.
pub fn poisson_distribution(mu: f64, n_cut: usize) -> Result<PhotonNumberDistribution, ModelError> {
    check_mean(mu)?;
    if n_cut < 1 {
        return Err(ModelError::InvalidCutoff(n_cut));
    }
    let mut probs = Vec::with_capacity(n_cut + 1);
    let mut term = (-mu).exp();
    for n in 0..=n_cut {
        if n > 0 {
            term *= mu / n as f64;
        }
        probs.push(term);
    }
    // Tail summed directly from the next term onwards; the terms decrease
    // geometrically once n > mu, so this avoids the cancellation in 1 - sum.
    let mut tail = 0.0;
    let mut n = n_cut + 1;
    loop {
        term *= mu / n as f64;
        tail += term;
        if (n as f64 > mu && term < tail * 1e-17) || term == 0.0 || n > n_cut + 100_000 {
            break;
        }
        n += 1;
    }
    if tail > TAIL_TOLERANCE {
        return Err(ModelError::TruncationTooSevere { n_cut, tail });
    }
    Ok(PhotonNumberDistribution { probs })
}

/// Thermal (Bose-Einstein) light, `p_n = mu^n / (1 + mu)^{n+1}`.
pub fn thermal_distribution(mu: f64, n_cut: usize) -> Result<PhotonNumberDistribution, ModelError> {
    check_mean(mu)?;
    if n_cut < 1 {
        return Err(ModelError::InvalidCutoff(n_cut));
    }
    let ratio = mu / (1.0 + mu);
    let tail = ratio.powi(n_cut as i32 + 1);
    if tail > TAIL_TOLERANCE {
        return Err(ModelError::TruncationTooSevere { n_cut, tail });
    }
    let mut term = 1.0 / (1.0 + mu);
    let probs = (0..=n_cut)
        .map(|n| {
            if n > 0 {
                term *= ratio;
            }
            term
        })
        .collect();
    Ok(PhotonNumberDistribution { probs })
}

/// Ideal single-photon source, `p_1 = 1`.
pub fn single_photon_distribution(n_cut: usize) -> Result<PhotonNumberDistribution, ModelError> {
    if n_cut < 1 {
        return Err(ModelError::InvalidCutoff(n_cut));
    }
    let mut probs = vec![0.0; n_cut + 1];
    probs[1] = 1.0;
    Ok(PhotonNumberDistribution { probs })
}

/// Convex combination of distributions sharing one cutoff. The result is
/// never renormalised.
pub fn mixture_distribution(
    components: &[PhotonNumberDistribution],
    weights: &[f64],
) -> Result<PhotonNumberDistribution, ModelError> {
    if components.len() != weights.len() || components.is_empty() {
        return Err(ModelError::MismatchedLengths {
            components: components.len(),
            weights: weights.len(),
        });
    }
    check_weights(weights)?;
    let n_cut = components[0].n_cut();
    if components.iter().any(|c| c.n_cut() != n_cut) {
        return Err(ModelError::MismatchedCutoff);
    }
    let probs = (0..=n_cut)
        .map(|n| compensated_sum(components.iter().zip(weights).map(|(c, w)| w * c.probs[n])))
        .collect();
    PhotonNumberDistribution::new(probs)
}

fn check_weights(weights: &[f64]) -> Result<(), ModelError> {
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(ModelError::BadWeights(format!(
            "weight {w} is not positive"
        )));
    }
    let total: f64 = compensated_sum(weights.iter().copied());
    if (total - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(ModelError::BadWeights(format!("weights sum to {total}")));
    }
    Ok(())
}

/// `mu = sum_n n p_n`.
pub fn mean_photon_number(dist: &PhotonNumberDistribution) -> f64 {
    factorial_moment(dist, 1)
}

/// `sum_n p_n n (n-1) ... (n-m+1)`, accumulated in ascending `n`.
pub fn factorial_moment(dist: &PhotonNumberDistribution, m: u32) -> f64 {
    compensated_sum(
        dist.probs
            .iter()
            .enumerate()
            .map(|(n, p)| p * falling_factorial(n as f64, m)),
    )
}

/// `n (n-1) ... (n-m+1)`.
pub fn falling_factorial(n: f64, m: u32) -> f64 {
    (0..m).map(|k| n - k as f64).product()
}

/// Normalised zero-delay correlation `g_m`: the m-th factorial moment over `mu^m`.
pub fn correlation_from_distribution(
    dist: &PhotonNumberDistribution,
    m: u32,
) -> Result<f64, ModelError> {
    if !(2..=4).contains(&m) {
        return Err(ModelError::UnsupportedOrder(m));
    }
    let mu = mean_photon_number(dist);
    if mu <= 0.0 {
        return Err(ModelError::ZeroMeanSource);
    }
    Ok(factorial_moment(dist, m) / mu.powi(m as i32))
}

/// Neumaier-compensated summation.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// A light source described by its photon statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceKind {
    Poisson { mean: f64 },
    Thermal { mean: f64 },
    SinglePhoton,
    Mixture { components: Vec<(f64, SourceKind)> },
}

impl SourceKind {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            SourceKind::Poisson { mean } | SourceKind::Thermal { mean } => check_mean(*mean),
            SourceKind::SinglePhoton => Ok(()),
            SourceKind::Mixture { components } => {
                if components.is_empty() {
                    return Err(ModelError::MismatchedLengths {
                        components: 0,
                        weights: 0,
                    });
                }
                let weights: Vec<f64> = components.iter().map(|(w, _)| *w).collect();
                check_weights(&weights)?;
                components.iter().try_for_each(|(_, c)| c.validate())
            }
        }
    }

    /// Analytic mean photon number.
    pub fn mean(&self) -> f64 {
        match self {
            SourceKind::Poisson { mean } | SourceKind::Thermal { mean } => *mean,
            SourceKind::SinglePhoton => 1.0,
            SourceKind::Mixture { components } => {
                components.iter().map(|(w, c)| w * c.mean()).sum()
            }
        }
    }

    pub fn distribution(&self, n_cut: usize) -> Result<PhotonNumberDistribution, ModelError> {
        self.validate()?;
        match self {
            SourceKind::Poisson { mean } => poisson_distribution(*mean, n_cut),
            SourceKind::Thermal { mean } => thermal_distribution(*mean, n_cut),
            SourceKind::SinglePhoton => single_photon_distribution(n_cut),
            SourceKind::Mixture { components } => {
                let dists = components
                    .iter()
                    .map(|(_, c)| c.distribution(n_cut))
                    .collect::<Result<Vec<_>, _>>()?;
                let weights: Vec<f64> = components.iter().map(|(w, _)| *w).collect();
                mixture_distribution(&dists, &weights)
            }
        }
    }

    /// Smallest cutoff `>= min_cut` whose dropped tail stays below
    /// [`TAIL_TOLERANCE`].
    pub fn auto_distribution(
        &self,
        min_cut: usize,
    ) -> Result<PhotonNumberDistribution, ModelError> {
        const MAX_CUT: usize = 100_000;
        let mut n_cut = min_cut.max(1);
        loop {
            match self.distribution(n_cut) {
                Err(ModelError::TruncationTooSevere { .. }) if n_cut < MAX_CUT => {
                    n_cut = (n_cut * 2).min(MAX_CUT);
                }
                other => return other,
            }
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKind::Poisson { mean } => write!(f, "poisson:{mean}"),
            SourceKind::Thermal { mean } => write!(f, "thermal:{mean}"),
            SourceKind::SinglePhoton => write!(f, "single"),
            SourceKind::Mixture { components } => {
                write!(f, "mix:")?;
                for (i, (w, c)) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{w}*{c}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `poisson:<mu>`, `thermal:<mu>`, `single`, or
/// `mix:<w>*<source>+<w>*<source>...` (mixtures do not nest).
impl FromStr for SourceKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::ParseSource(s.to_string());
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("mix:") {
            let components = rest
                .split('+')
                .map(|part| {
                    let (w, src) = part.split_once('*').ok_or_else(bad)?;
                    let w: f64 = w.trim().parse().map_err(|_| bad())?;
                    let src: SourceKind = src.parse()?;
                    if matches!(src, SourceKind::Mixture { .. }) {
                        return Err(bad());
                    }
                    Ok((w, src))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let source = SourceKind::Mixture { components };
            source.validate()?;
            return Ok(source);
        }
        if s == "single" || s == "single_photon" {
            return Ok(SourceKind::SinglePhoton);
        }
        let (kind, mean) = s.split_once(':').ok_or_else(bad)?;
        let mean: f64 = mean.trim().parse().map_err(|_| bad())?;
        let source = match kind {
            "poisson" => SourceKind::Poisson { mean },
            "thermal" => SourceKind::Thermal { mean },
            _ => return Err(bad()),
        };
        source.validate()?;
        Ok(source)
    }
}
