//! Zero-delay `g_m` estimators from coincidence counts.
//!
//! For a detector combination `c` of size `m` the count ratio
//! `C_c N^{m-1} / prod_{i in c} S_i` estimates `g_m`; the unknown detector
//! efficiencies cancel in the linear-response regime. Combinations are
//! averaged with weights proportional to their expected coincidence counts
//! `prod S_i`, which reduces to
//!
//! ```text
//! g_m = (sum_c C_c) N^{m-1} / (sum_c prod_{i in c} S_i)
//! ```
//!
//! and stays defined when individual combinations saw no coincidence. The
//! uncertainty is Poissonian counting error propagated to first order:
//! `(sigma/g)^2 = 1/sum_c C_c + sum_i w_i^2 / S_i`, with `w_i` the share of
//! the denominator coming from combinations that contain detector `i`. A
//! single combination gives `1/C + sum_i 1/S_i`.

use super::{CoincidenceCounts, CorrelationMeasurement, HbtError, PAIRS, TRIPLES};

fn combinations(order: u32) -> Result<Vec<Vec<usize>>, HbtError> {
    match order {
        2 => Ok(PAIRS.iter().map(|p| p.to_vec()).collect()),
        3 => Ok(TRIPLES.iter().map(|t| t.to_vec()).collect()),
        4 => Ok(vec![vec![0, 1, 2, 3]]),
        _ => Err(HbtError::UnsupportedOrder(order)),
    }
}

fn coincidences(counts: &CoincidenceCounts, order: u32) -> Vec<u64> {
    match order {
        2 => counts.pair_counts.to_vec(),
        3 => counts.triple_counts.to_vec(),
        _ => vec![counts.quad_count],
    }
}

/// Estimate of a single order.
pub fn estimate_correlation(
    counts: &CoincidenceCounts,
    order: u32,
) -> Result<CorrelationMeasurement, HbtError> {
    let combos = combinations(order)?;
    let insufficient = |reason: String| HbtError::InsufficientCounts { order, reason };
    if let Some(d) = counts.singles.iter().position(|&s| s == 0) {
        return Err(insufficient(format!("detector {d} never clicked")));
    }
    let total_coincidences: u64 = coincidences(counts, order).iter().sum();
    if total_coincidences == 0 {
        return Err(insufficient(format!(
            "no {order}-fold coincidences recorded"
        )));
    }

    let singles: Vec<f64> = counts.singles.iter().map(|&s| s as f64).collect();
    let n = counts.n_pulses as f64;
    let expected: Vec<f64> = combos
        .iter()
        .map(|c| c.iter().map(|&i| singles[i]).product())
        .collect();
    let denominator: f64 = expected.iter().sum();
    let value = total_coincidences as f64 * n.powi(order as i32 - 1) / denominator;

    let singles_term: f64 = (0..singles.len())
        .map(|i| {
            let share: f64 = combos
                .iter()
                .zip(&expected)
                .filter(|(c, _)| c.contains(&i))
                .map(|(_, e)| e)
                .sum::<f64>()
                / denominator;
            share * share / singles[i]
        })
        .sum();
    let rel_var = 1.0 / total_coincidences as f64 + singles_term;
    CorrelationMeasurement::new(order, value, value * rel_var.sqrt())
}

/// Estimates for orders 2, 3 and 4; fails if any order lacks counts.
pub fn estimate_correlations(
    counts: &CoincidenceCounts,
) -> Result<Vec<CorrelationMeasurement>, HbtError> {
    (2..=4).map(|m| estimate_correlation(counts, m)).collect()
}
