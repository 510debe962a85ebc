//! Worst-case bounds on `p_0 ... p_3` from measured correlation functions.
//!
//! The photon-number distribution is unknown; only its mean `mu` and the
//! confidence intervals `g_m +/- gamma sigma_m` are trusted. The raw moments
//! follow from the factorial moments,
//!
//! ```text
//! E[n]   = mu
//! E[n^2] = mu^2 g2 + mu
//! E[n^3] = mu^3 g3 + 3 mu^2 g2 + mu
//! E[n^4] = mu^4 g4 + 6 mu^3 g3 + 7 mu^2 g2 + mu
//! ```
//!
//! and the distribution is truncated at `n_cut` under the assumption that at
//! least half of the probability mass lies at or below `n_cut`. That gives a
//! linear program in `p_0 ... p_{n_cut}` and the interval-bounded `g_m`:
//!
//! - `1/2 <= sum p_n <= 1`
//! - `sum p_n n^k >= E[n^k] / 2`
//! - `sum p_n n^k <= E[n^k] - (n_cut + 1) (E[n^{k-1}] - sum p_n n^{k-1})`
//!
//! for every `k` whose moment only involves measured orders. Minimising and
//! maximising each `p_n` gives the bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::hbt::CorrelationMeasurement;
use crate::lp::{self, LpError, LpProblem, LpSolution, Relation};

pub const DEFAULT_GAMMA: f64 = 7.0;
pub const DEFAULT_N_CUT: usize = 25;
/// Minimum probability mass assumed to lie at or below `n_cut`.
pub const MASS_FLOOR: f64 = 0.5;
/// Photon numbers whose probabilities are bounded.
pub const BOUNDED_PHOTON_NUMBERS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("target photon number {0} is outside 0..=3")]
    BadTarget(usize),
    #[error("measured orders {0:?} must be one of {{2}}, {{2,3}}, {{2,3,4}}")]
    BadOrderSet(Vec<u32>),
    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),
    #[error("n_cut must be at least 4, got {0}")]
    BadCutoff(usize),
    #[error(
        "correlation intervals are inconsistent with mu = {mu}: no photon-number \
         distribution satisfies them (check the calibration)"
    )]
    InfeasibleConstraints { mu: f64 },
    #[error("bound LP for p{0} is unbounded")]
    Unbounded(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Min,
    Max,
}

/// Measured correlations with the confidence width and the prepared mean
/// photon number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationConstraints {
    measurements: Vec<CorrelationMeasurement>,
    gamma: f64,
    mu: f64,
}

impl CorrelationConstraints {
    pub fn new(
        mut measurements: Vec<CorrelationMeasurement>,
        gamma: f64,
        mu: f64,
    ) -> Result<Self, BoundsError> {
        measurements.sort_by_key(|m| m.order);
        let orders: Vec<u32> = measurements.iter().map(|m| m.order).collect();
        if orders.is_empty() || orders.iter().enumerate().any(|(i, &o)| o != i as u32 + 2) {
            return Err(BoundsError::BadOrderSet(orders));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(BoundsError::InvalidConstraints(format!("gamma = {gamma}")));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(BoundsError::InvalidConstraints(format!("mu = {mu}")));
        }
        Ok(Self {
            measurements,
            gamma,
            mu,
        })
    }

    pub fn measurements(&self) -> &[CorrelationMeasurement] {
        &self.measurements
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn orders(&self) -> Vec<u32> {
        self.measurements.iter().map(|m| m.order).collect()
    }

    pub fn max_order(&self) -> u32 {
        self.measurements.last().map(|m| m.order).unwrap_or(1)
    }

    /// The same data restricted to orders `2..=max_order`.
    pub fn truncated(&self, max_order: u32) -> Result<Self, BoundsError> {
        let kept = self
            .measurements
            .iter()
            .copied()
            .filter(|m| m.order <= max_order)
            .collect();
        Self::new(kept, self.gamma, self.mu)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self, BoundsError> {
        Self::new(self.measurements.clone(), gamma, self.mu)
    }

    /// Confidence interval `[max(0, g - gamma sigma), g + gamma sigma]`.
    pub fn interval(&self, order: u32) -> Option<(f64, f64)> {
        self.measurements
            .iter()
            .find(|m| m.order == order)
            .map(|m| {
                let half = self.gamma * m.sigma;
                ((m.value - half).max(0.0), m.value + half)
            })
    }
}

/// Raw moment `E[n^k]` as `constant + sum_m coeff_m g_m`, indexed by order
/// `2..=4` in `coeffs[order - 2]`.
fn raw_moment(k: u32, mu: f64) -> (f64, [f64; 3]) {
    let mu2 = mu * mu;
    let mu3 = mu2 * mu;
    match k {
        0 => (1.0, [0.0; 3]),
        1 => (mu, [0.0; 3]),
        2 => (mu, [mu2, 0.0, 0.0]),
        3 => (mu, [3.0 * mu2, mu3, 0.0]),
        4 => (mu, [7.0 * mu2, 6.0 * mu3, mu3 * mu]),
        _ => unreachable!("moments above the fourth are never constrained"),
    }
}

/// Column of the `g_order` variable in problems built for `orders`.
pub fn g_variable_index(n_cut: usize, order: u32) -> usize {
    n_cut + 1 + (order as usize - 2)
}

/// LP whose minimum is the lower (`Sense::Min`) or the negated upper
/// (`Sense::Max`) bound on `p_target`.
pub fn build_pn_bound_problem(
    constraints: &CorrelationConstraints,
    n_cut: usize,
    target_n: usize,
    sense: Sense,
) -> Result<LpProblem, BoundsError> {
    if target_n >= BOUNDED_PHOTON_NUMBERS {
        return Err(BoundsError::BadTarget(target_n));
    }
    if n_cut < 4 {
        return Err(BoundsError::BadCutoff(n_cut));
    }
    let mu = constraints.mu;
    let max_order = constraints.max_order();
    let num_p = n_cut + 1;
    let num_vars = num_p + (max_order as usize - 1);

    let mut objective = vec![0.0; num_vars];
    objective[target_n] = match sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut problem = LpProblem::new(objective)?;
    for n in 0..num_p {
        problem.set_bounds(n, 0.0, 1.0)?;
    }
    for m in &constraints.measurements {
        let (lo, hi) = constraints.interval(m.order).expect("order is measured");
        problem.set_bounds(g_variable_index(n_cut, m.order), lo, hi)?;
    }

    let mass: Vec<f64> = (0..num_vars)
        .map(|j| if j < num_p { 1.0 } else { 0.0 })
        .collect();
    problem.add_constraint(mass.clone(), Relation::Le, 1.0)?;
    problem.add_constraint(mass, Relation::Ge, MASS_FLOOR)?;

    let tail_weight = (n_cut + 1) as f64;
    let with_g = |row: &mut Vec<f64>, coeffs: &[f64; 3], scale: f64| {
        for order in 2..=max_order {
            row[g_variable_index(n_cut, order)] += scale * coeffs[order as usize - 2];
        }
    };
    for k in 1..=max_order.max(1) {
        let (c_k, g_k) = raw_moment(k, mu);
        let (c_prev, g_prev) = raw_moment(k - 1, mu);

        // sum p n^k - (g terms of E[n^k]) / 2 >= c_k / 2
        let mut lower: Vec<f64> = vec![0.0; num_vars];
        for n in 0..num_p {
            lower[n] = (n as f64).powi(k as i32);
        }
        with_g(&mut lower, &g_k, -MASS_FLOOR);
        problem.add_constraint(lower, Relation::Ge, MASS_FLOOR * c_k)?;

        // sum p (n^k - (N+1) n^{k-1}) - g terms of E[n^k]
        //   + (N+1) g terms of E[n^{k-1}] <= c_k - (N+1) c_{k-1}
        let mut upper: Vec<f64> = vec![0.0; num_vars];
        for n in 0..num_p {
            let nf = n as f64;
            upper[n] = nf.powi(k as i32) - tail_weight * nf.powi(k as i32 - 1);
        }
        with_g(&mut upper, &g_k, -1.0);
        with_g(&mut upper, &g_prev, tail_weight);
        problem.add_constraint(upper, Relation::Le, c_k - tail_weight * c_prev)?;
    }
    Ok(problem)
}

/// Gaussian two-sided tail probability outside `+/- gamma` standard deviations.
pub fn confidence_epsilon(gamma: f64) -> f64 {
    erfc(gamma / std::f64::consts::SQRT_2)
}

/// Lower and upper bounds on `p_0 ... p_3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "BoundsRecord", try_from = "BoundsRecord")]
pub struct ProbabilityBounds {
    pub mu: f64,
    pub gamma: f64,
    pub n_cut: usize,
    pub orders: Vec<u32>,
    pub lower: [f64; BOUNDED_PHOTON_NUMBERS],
    pub upper: [f64; BOUNDED_PHOTON_NUMBERS],
    /// Failure probability of each confidence interval.
    pub epsilon_per_constraint: f64,
    /// Union bound over the measured orders.
    pub epsilon_total: f64,
}

impl ProbabilityBounds {
    pub fn interval(&self, n: usize) -> (f64, f64) {
        (self.lower[n], self.upper[n])
    }

    pub fn contains(&self, n: usize, p: f64, tol: f64) -> bool {
        n < BOUNDED_PHOTON_NUMBERS && p >= self.lower[n] - tol && p <= self.upper[n] + tol
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bounds serialise")
    }
}

/// On-disk layout with a stable key order.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BoundsRecord {
    mu: f64,
    gamma: f64,
    n_cut: usize,
    orders: Vec<u32>,
    bounds: BTreeMap<String, [f64; 2]>,
    epsilon_total: f64,
    epsilon_per_constraint: f64,
    /// The truncation assumption accepted with these bounds.
    mass_floor: f64,
}

impl From<ProbabilityBounds> for BoundsRecord {
    fn from(b: ProbabilityBounds) -> Self {
        let bounds = (0..BOUNDED_PHOTON_NUMBERS)
            .map(|n| (n.to_string(), [b.lower[n], b.upper[n]]))
            .collect();
        BoundsRecord {
            mu: b.mu,
            gamma: b.gamma,
            n_cut: b.n_cut,
            orders: b.orders,
            bounds,
            epsilon_total: b.epsilon_total,
            epsilon_per_constraint: b.epsilon_per_constraint,
            mass_floor: MASS_FLOOR,
        }
    }
}

impl TryFrom<BoundsRecord> for ProbabilityBounds {
    type Error = String;

    fn try_from(r: BoundsRecord) -> Result<Self, Self::Error> {
        let mut lower = [0.0; BOUNDED_PHOTON_NUMBERS];
        let mut upper = [1.0; BOUNDED_PHOTON_NUMBERS];
        for n in 0..BOUNDED_PHOTON_NUMBERS {
            let [lo, hi] = *r
                .bounds
                .get(&n.to_string())
                .ok_or_else(|| format!("missing bounds for p{n}"))?;
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(format!("bounds for p{n} are not 0 <= {lo} <= {hi} <= 1"));
            }
            lower[n] = lo;
            upper[n] = hi;
        }
        Ok(ProbabilityBounds {
            mu: r.mu,
            gamma: r.gamma,
            n_cut: r.n_cut,
            orders: r.orders,
            lower,
            upper,
            epsilon_per_constraint: r.epsilon_per_constraint,
            epsilon_total: r.epsilon_total,
        })
    }
}

/// Solves the eight bound LPs (min and max for each of `p_0 ... p_3`).
pub fn bound_photon_probabilities(
    constraints: &CorrelationConstraints,
    n_cut: usize,
) -> Result<ProbabilityBounds, BoundsError> {
    let jobs: Vec<(usize, Sense)> = (0..BOUNDED_PHOTON_NUMBERS)
        .flat_map(|n| [(n, Sense::Min), (n, Sense::Max)])
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(n, sense)| {
            let problem = build_pn_bound_problem(constraints, n_cut, n, sense)?;
            match lp::solve_lp(&problem)? {
                LpSolution::Optimal(o) => Ok(match sense {
                    Sense::Min => o.value,
                    Sense::Max => -o.value,
                }),
                LpSolution::Infeasible => {
                    Err(BoundsError::InfeasibleConstraints { mu: constraints.mu })
                }
                LpSolution::Unbounded => Err(BoundsError::Unbounded(n)),
            }
        })
        .collect::<Result<Vec<f64>, BoundsError>>()?;

    let mut lower = [0.0; BOUNDED_PHOTON_NUMBERS];
    let mut upper = [0.0; BOUNDED_PHOTON_NUMBERS];
    for n in 0..BOUNDED_PHOTON_NUMBERS {
        upper[n] = values[2 * n + 1].clamp(0.0, 1.0);
        lower[n] = values[2 * n].clamp(0.0, upper[n]);
    }
    let epsilon = confidence_epsilon(constraints.gamma);
    Ok(ProbabilityBounds {
        mu: constraints.mu,
        gamma: constraints.gamma,
        n_cut,
        orders: constraints.orders(),
        lower,
        upper,
        epsilon_per_constraint: epsilon,
        epsilon_total: epsilon * constraints.measurements.len() as f64,
    })
}
