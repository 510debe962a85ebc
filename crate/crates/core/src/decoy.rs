//! Decoy-state bounds on the vacuum and single-photon yields and on the
//! single-photon error rate.
//!
//! Each intensity `mu` gives an observed gain `Y = sum_n p_n y_n` with unknown
//! yields `y_n`. When the `p_n` themselves are only known within an envelope
//! `[p_n_lo, p_n_hi]` the products are removed by taking, per intensity,
//!
//! ```text
//! sum_n p_n_lo y_n          <= Y_hi
//! sum_n p_n_hi y_n + Gamma  >= Y_lo,    Gamma = 1 - sum_n p_n_lo
//! ```
//!
//! over `y_0 ... y_n_cut` in `[0, 1]`, where `Gamma` covers the truncated tail.
//! Minimising `y_1` and `y_0` gives the yield bounds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{self, LpError, LpProblem, LpSolution, Relation};
use crate::photon_model::{poisson_distribution, ModelError, PhotonNumberDistribution};
use crate::stats_bounds::{ProbabilityBounds, BOUNDED_PHOTON_NUMBERS};

/// Largest useful single-photon error rate; the binary entropy peaks there.
pub const E1_CAP: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecoyError {
    #[error("invalid intensity settings: {0}")]
    InvalidSettings(String),
    #[error("invalid observed gains: {0}")]
    InvalidObservations(String),
    #[error("invalid photon-number envelope: {0}")]
    InvalidEnvelope(String),
    #[error("observed gains are inconsistent with the photon-number bounds")]
    InfeasibleObservations,
    #[error("p1_lower * y1_lower = 0: no single-photon contribution can be certified")]
    DegenerateDenominator,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Signal, decoy and vacuum intensities and how often each is sent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensitySettings {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub p_u: f64,
    pub p_v: f64,
    pub p_w: f64,
}

impl Default for IntensitySettings {
    fn default() -> Self {
        Self {
            u: 0.42,
            v: 0.02,
            w: 1e-4,
            p_u: 0.9,
            p_v: 0.05,
            p_w: 0.05,
        }
    }
}

impl IntensitySettings {
    pub fn validate(&self) -> Result<(), DecoyError> {
        let bad = |m: String| Err(DecoyError::InvalidSettings(m));
        if !(self.u.is_finite() && self.u > self.v && self.v > self.w && self.w >= 0.0) {
            return bad(format!(
                "need u > v > w >= 0, got {}, {}, {}",
                self.u, self.v, self.w
            ));
        }
        let probs = [self.p_u, self.p_v, self.p_w];
        if probs.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return bad(format!(
                "class probabilities must be positive, got {probs:?}"
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("class probabilities sum to {total}"));
        }
        Ok(())
    }
}

/// Closed interval inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn point(x: f64) -> Self {
        Self { lower: x, upper: x }
    }

    /// `[x (1 - margin), x (1 + margin)]` clipped to `[0, 1]`.
    pub fn around(x: f64, relative_margin: f64) -> Self {
        Self {
            lower: (x * (1.0 - relative_margin)).max(0.0),
            upper: (x * (1.0 + relative_margin)).min(1.0),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    fn is_valid(&self) -> bool {
        0.0 <= self.lower && self.lower <= self.upper && self.upper <= 1.0
    }
}

/// Gain `Y` and bit-error gain `B = Y E` observed for one intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityGains {
    pub gain: Interval,
    pub error_gain: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedGains {
    pub signal: IntensityGains,
    pub decoy: IntensityGains,
    pub vacuum: IntensityGains,
}

impl ObservedGains {
    pub fn per_intensity(&self) -> [&IntensityGains; 3] {
        [&self.signal, &self.decoy, &self.vacuum]
    }

    pub fn validate(&self) -> Result<(), DecoyError> {
        for (name, g) in ["signal", "decoy", "vacuum"]
            .iter()
            .zip(self.per_intensity())
        {
            if !g.gain.is_valid() || !g.error_gain.is_valid() {
                return Err(DecoyError::InvalidObservations(format!(
                    "{name} intervals must satisfy 0 <= lower <= upper <= 1"
                )));
            }
            if g.error_gain.lower > g.gain.lower || g.error_gain.upper > g.gain.upper {
                return Err(DecoyError::InvalidObservations(format!(
                    "{name} error gain exceeds its gain"
                )));
            }
        }
        Ok(())
    }
}

/// Per-photon-number probability bounds `lower[n] <= p_n <= upper[n]` for
/// `n = 0 ... n_cut`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonProbabilityEnvelope {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PhotonProbabilityEnvelope {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, DecoyError> {
        if lower.len() != upper.len() || lower.len() < 2 {
            return Err(DecoyError::InvalidEnvelope(format!(
                "{} lower and {} upper entries",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(n) = (0..lower.len())
            .find(|&n| !(0.0 <= lower[n] && lower[n] <= upper[n] && upper[n] <= 1.0))
        {
            return Err(DecoyError::InvalidEnvelope(format!(
                "p{n} bounds [{}, {}]",
                lower[n], upper[n]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Signal envelope: `p_0 ... p_3` from the bounds, `[0, 1]` beyond.
    pub fn from_bounds(bounds: &ProbabilityBounds, n_cut: usize) -> Result<Self, DecoyError> {
        let mut lower = vec![0.0; n_cut + 1];
        let mut upper = vec![1.0; n_cut + 1];
        let k = BOUNDED_PHOTON_NUMBERS.min(n_cut + 1);
        lower[..k].copy_from_slice(&bounds.lower[..k]);
        upper[..k].copy_from_slice(&bounds.upper[..k]);
        Self::new(lower, upper)
    }

    /// Zero-width envelope of a known distribution truncated at `n_cut`.
    pub fn exact(dist: &PhotonNumberDistribution, n_cut: usize) -> Result<Self, DecoyError> {
        let probs: Vec<f64> = (0..=n_cut).map(|n| dist.prob(n)).collect();
        Self::new(probs.clone(), probs)
    }

    /// Exact Poisson envelope; `mean = 0` is the vacuum.
    pub fn poisson(mean: f64, n_cut: usize) -> Result<Self, DecoyError> {
        if mean == 0.0 {
            return Self::exact(&PhotonNumberDistribution::vacuum(n_cut)?, n_cut);
        }
        Self::exact(&poisson_distribution(mean, n_cut)?, n_cut)
    }

    pub fn n_cut(&self) -> usize {
        self.lower.len() - 1
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Probability mass not pinned down by the lower bounds, `1 - sum lower`.
    pub fn residual(&self) -> f64 {
        (1.0 - self.lower.iter().sum::<f64>()).max(0.0)
    }
}

/// Envelopes for signal, decoy and vacuum, in that order.
pub type IntensityEnvelopes = [PhotonProbabilityEnvelope; 3];

/// Signal envelope from bounds plus exact Poisson decoy and vacuum.
pub fn intensity_envelopes(
    signal: PhotonProbabilityEnvelope,
    settings: &IntensitySettings,
) -> Result<IntensityEnvelopes, DecoyError> {
    settings.validate()?;
    let n_cut = signal.n_cut();
    Ok([
        signal,
        PhotonProbabilityEnvelope::poisson(settings.v, n_cut)?,
        PhotonProbabilityEnvelope::poisson(settings.w, n_cut)?,
    ])
}

/// Yield LP for `target` photons (minimisation). With `use_error_gains`
/// the rows use the `B` intervals instead of the gains, i.e. the variables
/// become the per-photon-number error gains `b_n`.
pub fn build_yield_problem(
    observed: &ObservedGains,
    envelopes: &IntensityEnvelopes,
    target: usize,
    use_error_gains: bool,
) -> Result<LpProblem, DecoyError> {
    let n_cut = envelopes[0].n_cut();
    if envelopes.iter().any(|e| e.n_cut() != n_cut) || target > n_cut {
        return Err(DecoyError::InvalidEnvelope("mismatched truncation".into()));
    }
    let mut objective = vec![0.0; n_cut + 1];
    objective[target] = 1.0;
    let mut problem = LpProblem::new(objective)?;
    for n in 0..=n_cut {
        problem.set_bounds(n, 0.0, 1.0)?;
    }
    for (env, obs) in envelopes.iter().zip(observed.per_intensity()) {
        let data = if use_error_gains {
            obs.error_gain
        } else {
            obs.gain
        };
        problem.add_constraint(env.lower.clone(), Relation::Le, data.upper)?;
        problem.add_constraint(env.upper.clone(), Relation::Ge, data.lower - env.residual())?;
    }
    Ok(problem)
}

fn minimise(problem: &LpProblem) -> Result<f64, DecoyError> {
    match lp::solve_lp(problem)? {
        LpSolution::Optimal(o) => Ok(o.value.clamp(0.0, 1.0)),
        LpSolution::Infeasible => Err(DecoyError::InfeasibleObservations),
        LpSolution::Unbounded => unreachable!("all variables are boxed"),
    }
}

/// Lower bounds on the vacuum and single-photon yields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldLowerBounds {
    pub y0_lower: f64,
    pub y1_lower: f64,
}

/// Yield bounds for arbitrary envelopes.
pub fn bound_yields_with_envelopes(
    observed: &ObservedGains,
    envelopes: &IntensityEnvelopes,
) -> Result<YieldLowerBounds, DecoyError> {
    observed.validate()?;
    let (y1, y0) = rayon::join(
        || minimise(&build_yield_problem(observed, envelopes, 1, false)?),
        || minimise(&build_yield_problem(observed, envelopes, 0, false)?),
    );
    Ok(YieldLowerBounds {
        y0_lower: y0?,
        y1_lower: y1?,
    })
}

/// Yield bounds from signal photon-number bounds, with exact Poisson decoy
/// and vacuum intensities.
pub fn bound_yields(
    observed: &ObservedGains,
    signal_bounds: &ProbabilityBounds,
    settings: &IntensitySettings,
    n_cut: usize,
) -> Result<YieldLowerBounds, DecoyError> {
    let signal = PhotonProbabilityEnvelope::from_bounds(signal_bounds, n_cut)?;
    bound_yields_with_envelopes(observed, &intensity_envelopes(signal, settings)?)
}

/// Upper bound on the single-photon error rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateBound {
    pub e1_upper: f64,
    /// The quotient before clamping into `[0, 0.5]`.
    pub unclamped: f64,
    pub clamped: bool,
}

/// `e1 <= (B_hi - p0_lo y0_lo e0_lo) / (p1_lo y1_lo)`, clamped into
/// `[0, 0.5]`.
pub fn bound_error_rate_e1(
    observed: &ObservedGains,
    p0_lower: f64,
    y0_lower: f64,
    e0_lower: f64,
    p1_lower: f64,
    y1_lower: f64,
) -> Result<ErrorRateBound, DecoyError> {
    let denominator = p1_lower * y1_lower;
    if denominator.is_nan() || denominator <= 0.0 {
        return Err(DecoyError::DegenerateDenominator);
    }
    let unclamped =
        (observed.signal.error_gain.upper - p0_lower * y0_lower * e0_lower) / denominator;
    let e1_upper = unclamped.clamp(0.0, E1_CAP);
    Ok(ErrorRateBound {
        e1_upper,
        unclamped,
        clamped: e1_upper != unclamped,
    })
}

/// Upper bound on the single-photon error gain `b_1` by linear programming,
/// with `b_0 >= y0_lower e0_lower`. Dividing by `y1_lower` gives an error
/// rate bound no looser than the closed form.
pub fn bound_error_gain_b1(
    observed: &ObservedGains,
    envelopes: &IntensityEnvelopes,
    y0_lower: f64,
    e0_lower: f64,
) -> Result<f64, DecoyError> {
    observed.validate()?;
    let mut problem = build_yield_problem(observed, envelopes, 1, true)?.negated();
    problem.set_bounds(0, (y0_lower * e0_lower).min(1.0), 1.0)?;
    Ok(-minimise_raw(&problem)?)
}

fn minimise_raw(problem: &LpProblem) -> Result<f64, DecoyError> {
    match lp::solve_lp(problem)? {
        LpSolution::Optimal(o) => Ok(o.value),
        LpSolution::Infeasible => Err(DecoyError::InfeasibleObservations),
        LpSolution::Unbounded => unreachable!("all variables are boxed"),
    }
}

/// Everything the key rate needs from the decoy analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldBounds {
    pub y0_lower: f64,
    pub y1_lower: f64,
    pub e1_upper: f64,
    pub e1_clamped: bool,
}
