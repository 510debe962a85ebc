//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as `min c.x` subject to rows `a.x {<=, =, >=} b` and a
//! box `lo <= x <= hi` per variable (either side may be infinite). Pivoting
//! follows Bland's rule (smallest eligible index enters, ties in the ratio
//! test leave by smallest basic index), which guarantees termination on
//! degenerate problems. Once the optimal basis is known the primal point and
//! the row duals are recomputed from the unmodified, row-scaled data with a
//! fresh factorisation so tableau round-off does not leak into the result.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute feasibility tolerance on the returned point.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Reduced-cost tolerance for optimality.
pub const OPTIMALITY_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint row has {got} coefficients, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable {index} has invalid bounds [{lo}, {hi}]")]
    InvalidBounds { index: usize, lo: f64, hi: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, x)| a * x).sum()
    }

    /// Signed violation: positive when `x` breaks the row.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => lhs - self.rhs,
            Relation::Ge => self.rhs - lhs,
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `min objective.x` over the rows and per-variable boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// New problem with every variable boxed in `[0, +inf)`.
    pub fn new(objective: Vec<f64>) -> Result<Self, LpError> {
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        let n = objective.len();
        Ok(Self {
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn add_constraint(
        &mut self,
        coeffs: Vec<f64>,
        relation: Relation,
        rhs: f64,
    ) -> Result<&mut Self, LpError> {
        if coeffs.len() != self.num_vars() {
            return Err(LpError::DimensionMismatch {
                expected: self.num_vars(),
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|a| !a.is_finite()) || !rhs.is_finite() {
            return Err(LpError::NonFinite("constraint"));
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(self)
    }

    pub fn set_bounds(&mut self, index: usize, lo: f64, hi: f64) -> Result<&mut Self, LpError> {
        let valid = index < self.num_vars()
            && !lo.is_nan()
            && !hi.is_nan()
            && lo <= hi
            && lo != f64::INFINITY
            && hi != f64::NEG_INFINITY;
        if !valid {
            return Err(LpError::InvalidBounds { index, lo, hi });
        }
        self.bounds[index] = (lo, hi);
        Ok(self)
    }

    /// Same feasible region with the objective negated.
    pub fn negated(&self) -> Self {
        Self {
            objective: self.objective.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }

    /// Largest constraint or bound violation of `x`, zero when feasible.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let boxes = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi));
        rows.chain(boxes).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub value: f64,
    pub point: Vec<f64>,
    /// One multiplier per row: `>= 0` on `Ge` rows, `<= 0` on `Le` rows, free
    /// on `Eq` rows. With the reduced costs `d = c - A^T y` minimised over
    /// each variable's box they give the lower bound
    /// `b.y + sum_j min(d_j lo_j, d_j hi_j)` on the optimum.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LpSolution {
    Optimal(Optimum),
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal(_) => LpStatus::Optimal,
            LpSolution::Infeasible => LpStatus::Infeasible,
            LpSolution::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        match self {
            LpSolution::Optimal(o) => Some(o),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.optimum().map(|o| o.value)
    }
}

/// Lower bound on `min c.x` certified by row multipliers `duals`.
///
/// Valid for any multipliers with the sign pattern documented on
/// [`Optimum::duals`]; returns `-inf` when the certificate does not bound an
/// unbounded variable direction.
pub fn dual_bound(problem: &LpProblem, duals: &[f64]) -> f64 {
    let mut bound: f64 = problem
        .constraints
        .iter()
        .zip(duals)
        .map(|(c, y)| c.rhs * y)
        .sum();
    for (j, &(lo, hi)) in problem.bounds.iter().enumerate() {
        let d = problem.objective[j]
            - problem
                .constraints
                .iter()
                .zip(duals)
                .map(|(c, y)| c.coeffs[j] * y)
                .sum::<f64>();
        let term = if d > 0.0 {
            d * lo
        } else if d < 0.0 {
            d * hi
        } else {
            0.0
        };
        if term.is_nan() {
            continue;
        }
        bound += term;
    }
    bound
}

/// Maximises the objective by minimising its negation.
pub fn solve_lp_max(problem: &LpProblem) -> Result<LpSolution, LpError> {
    Ok(match solve_lp(&problem.negated())? {
        LpSolution::Optimal(mut o) => {
            o.value = -o.value;
            LpSolution::Optimal(o)
        }
        other => other,
    })
}

/// Global minimum of the problem.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution, LpError> {
    let std = StandardForm::build(problem);
    if std.trivially_infeasible {
        return Ok(LpSolution::Infeasible);
    }
    let mut tab = Tableau::new(&std);
    let mut pivots = 0;

    if tab.num_artificial > 0 {
        let phase1_cost: Vec<f64> = (0..tab.num_cols)
            .map(|j| if tab.is_artificial(j) { 1.0 } else { 0.0 })
            .collect();
        tab.set_cost(&phase1_cost);
        match tab.run(true, &mut pivots)? {
            Phase::Optimal => {}
            // Phase one is bounded below by zero.
            Phase::Unbounded => unreachable!("phase one objective is bounded"),
        }
        if tab.objective_value() > FEASIBILITY_TOL {
            return Ok(LpSolution::Infeasible);
        }
        tab.expel_artificials(&mut pivots);
    }

    tab.set_cost(&std.cost);
    if let Phase::Unbounded = tab.run(false, &mut pivots)? {
        return Ok(LpSolution::Unbounded);
    }

    let (x_std, y_std) = tab.refined_solution(&std);
    let point = std.recover_point(&x_std);
    let duals = std.recover_duals(&y_std, problem.constraints.len());
    let value = problem.evaluate(&point);
    Ok(LpSolution::Optimal(Optimum {
        value,
        point,
        duals,
        pivots,
    }))
}

/// How an original variable maps onto nonnegative standard columns:
/// `x = offset + sum(sign * x_col)`.
#[derive(Debug, Clone)]
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy)]
enum RowOrigin {
    Original(usize),
    UpperBound,
}

/// `min cost.x` s.t. `rows x (rel) rhs`, `x >= 0`, with `rhs >= 0` and each
/// row scaled to unit max-norm.
#[derive(Debug)]
struct StandardForm {
    num_struct: usize,
    cost: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rels: Vec<Relation>,
    rhs: Vec<f64>,
    origin: Vec<RowOrigin>,
    /// Factor mapping a standard-row dual back to the original row's dual.
    dual_factor: Vec<f64>,
    vars: Vec<VarMap>,
    trivially_infeasible: bool,
}

impl StandardForm {
    fn build(problem: &LpProblem) -> Self {
        let mut vars = Vec::with_capacity(problem.num_vars());
        let mut num_struct = 0;
        let mut upper_rows: Vec<(usize, f64)> = Vec::new();
        for &(lo, hi) in &problem.bounds {
            let map = if lo.is_finite() {
                let col = num_struct;
                num_struct += 1;
                if hi.is_finite() {
                    upper_rows.push((col, hi - lo));
                }
                VarMap {
                    offset: lo,
                    cols: vec![(col, 1.0)],
                }
            } else if hi.is_finite() {
                let col = num_struct;
                num_struct += 1;
                VarMap {
                    offset: hi,
                    cols: vec![(col, -1.0)],
                }
            } else {
                let col = num_struct;
                num_struct += 2;
                VarMap {
                    offset: 0.0,
                    cols: vec![(col, 1.0), (col + 1, -1.0)],
                }
            };
            vars.push(map);
        }

        let mut cost = vec![0.0; num_struct];
        for (j, map) in vars.iter().enumerate() {
            for &(col, sign) in &map.cols {
                cost[col] += sign * problem.objective[j];
            }
        }

        let mut sf = StandardForm {
            num_struct,
            cost,
            rows: Vec::new(),
            rels: Vec::new(),
            rhs: Vec::new(),
            origin: Vec::new(),
            dual_factor: Vec::new(),
            vars,
            trivially_infeasible: false,
        };

        for (i, c) in problem.constraints.iter().enumerate() {
            let mut row = vec![0.0; num_struct];
            let mut rhs = c.rhs;
            for (j, &a) in c.coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let map = &sf.vars[j];
                rhs -= a * map.offset;
                for &(col, sign) in &map.cols {
                    row[col] += a * sign;
                }
            }
            sf.push_row(row, c.relation, rhs, RowOrigin::Original(i));
        }
        for (col, width) in upper_rows {
            let mut row = vec![0.0; num_struct];
            row[col] = 1.0;
            sf.push_row(row, Relation::Le, width, RowOrigin::UpperBound);
        }
        sf
    }

    fn push_row(&mut self, mut row: Vec<f64>, mut rel: Relation, mut rhs: f64, origin: RowOrigin) {
        let scale = row.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        if scale == 0.0 {
            let ok = match rel {
                Relation::Le => rhs >= -FEASIBILITY_TOL,
                Relation::Ge => rhs <= FEASIBILITY_TOL,
                Relation::Eq => rhs.abs() <= FEASIBILITY_TOL,
            };
            if !ok {
                self.trivially_infeasible = true;
            }
            return;
        }
        let mut factor = 1.0 / scale;
        if rhs * factor < 0.0 {
            factor = -factor;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        row.iter_mut().for_each(|a| *a *= factor);
        rhs *= factor;
        self.rows.push(row);
        self.rels.push(rel);
        self.rhs.push(rhs.max(0.0));
        self.origin.push(origin);
        self.dual_factor.push(factor);
    }

    fn recover_point(&self, x_std: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .map(|m| m.offset + m.cols.iter().map(|&(c, s)| s * x_std[c]).sum::<f64>())
            .collect()
    }

    fn recover_duals(&self, y_std: &[f64], num_rows: usize) -> Vec<f64> {
        let mut duals = vec![0.0; num_rows];
        for (k, origin) in self.origin.iter().enumerate() {
            if let RowOrigin::Original(i) = origin {
                duals[*i] = y_std[k] * self.dual_factor[k];
            }
        }
        duals
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

/// Dense tableau over structural, slack/surplus and artificial columns.
struct Tableau {
    num_cols: usize,
    num_artificial: usize,
    first_artificial: usize,
    /// `rows.len() x (num_cols + 1)`, rhs in the last column.
    rows: Vec<Vec<f64>>,
    /// Full standard-form column of each tableau column (for re-solves).
    columns: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Standard row index of each tableau row (rows may be dropped).
    row_ids: Vec<usize>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    objective: f64,
}

impl Tableau {
    fn new(std: &StandardForm) -> Self {
        let m = std.rows.len();
        let num_slack = std.rels.iter().filter(|r| **r != Relation::Eq).count();
        let num_artificial = std.rels.iter().filter(|r| **r != Relation::Le).count();
        let first_slack = std.num_struct;
        let first_artificial = first_slack + num_slack;
        let num_cols = first_artificial + num_artificial;

        let mut rows = vec![vec![0.0; num_cols + 1]; m];
        let mut basis = vec![0; m];
        let mut next_slack = first_slack;
        let mut next_art = first_artificial;
        for i in 0..m {
            rows[i][..std.num_struct].copy_from_slice(&std.rows[i]);
            rows[i][num_cols] = std.rhs[i];
            match std.rels[i] {
                Relation::Le => {
                    rows[i][next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    rows[i][next_slack] = -1.0;
                    next_slack += 1;
                    rows[i][next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    rows[i][next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let columns = (0..num_cols)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        let mut cost = vec![0.0; num_cols];
        cost[..std.num_struct].copy_from_slice(&std.cost);
        Tableau {
            num_cols,
            num_artificial,
            first_artificial,
            rows,
            columns,
            basis,
            row_ids: (0..m).collect(),
            cost,
            reduced: vec![0.0; num_cols],
            objective: 0.0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_artificial
    }

    fn set_cost(&mut self, cost: &[f64]) {
        self.cost = vec![0.0; self.num_cols];
        self.cost[..cost.len()].copy_from_slice(cost);
        self.reduced = self.cost.clone();
        self.objective = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.num_cols {
                    self.reduced[j] -= cb * row[j];
                }
                self.objective += cb * row[self.num_cols];
            }
        }
    }

    fn objective_value(&self) -> f64 {
        self.objective
    }

    fn run(&mut self, allow_artificial: bool, pivots: &mut usize) -> Result<Phase, LpError> {
        loop {
            let entering = (0..self.num_cols).find(|&j| {
                (allow_artificial || !self.is_artificial(j)) && self.reduced[j] < -OPTIMALITY_TOL
            });
            let Some(q) = entering else {
                return Ok(Phase::Optimal);
            };
            let rhs_col = self.num_cols;
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[q];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = row[rhs_col] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if ratio < best && !tie || tie && self.basis[i] < self.basis[k] {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            let Some((p, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            self.pivot(p, q);
            *pivots += 1;
            if *pivots > MAX_ITERATIONS {
                return Err(LpError::IterationLimit(MAX_ITERATIONS));
            }
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let width = self.num_cols + 1;
        let inv = 1.0 / self.rows[p][q];
        for v in self.rows[p].iter_mut() {
            *v *= inv;
        }
        self.rows[p][q] = 1.0;
        let pivot_row = self.rows[p].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for j in 0..width {
                row[j] -= f * pivot_row[j];
            }
            row[q] = 0.0;
            if row[width - 1] < 0.0 && row[width - 1] > -1e-13 {
                row[width - 1] = 0.0;
            }
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for j in 0..self.num_cols {
                self.reduced[j] -= f * pivot_row[j];
            }
            self.reduced[q] = 0.0;
            self.objective += f * pivot_row[width - 1];
        }
        self.basis[p] = q;
    }

    /// Pivots zero-level artificials out of the basis; rows where that is
    /// impossible are linearly dependent and are dropped.
    fn expel_artificials(&mut self, pivots: &mut usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if !self.is_artificial(self.basis[i]) {
                i += 1;
                continue;
            }
            let q = (0..self.first_artificial)
                .filter(|&j| self.rows[i][j].abs() > 1e-9)
                .max_by(|&a, &b| self.rows[i][a].abs().total_cmp(&self.rows[i][b].abs()));
            match q {
                Some(q) => {
                    self.pivot(i, q);
                    *pivots += 1;
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                    self.row_ids.remove(i);
                }
            }
        }
    }

    /// Primal values of the standard structural columns and standard-row
    /// duals, re-solved from the original standard-form data at the final
    /// basis. Falls back to tableau values if the basis matrix is singular.
    fn refined_solution(&self, std: &StandardForm) -> (Vec<f64>, Vec<f64>) {
        let m = self.rows.len();
        let mut x = vec![0.0; self.num_cols];
        let basis_matrix: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let sr = self.row_ids[r];
                self.basis.iter().map(|&j| self.columns[j][sr]).collect()
            })
            .collect();
        let b: Vec<f64> = self.row_ids.iter().map(|&sr| std.rhs[sr]).collect();
        let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();

        let xb = solve_dense(&basis_matrix, &b)
            .unwrap_or_else(|| self.rows.iter().map(|r| r[self.num_cols]).collect());
        for (k, &j) in self.basis.iter().enumerate() {
            x[j] = xb[k].max(0.0);
        }
        let transposed: Vec<Vec<f64>> = (0..m)
            .map(|k| (0..m).map(|r| basis_matrix[r][k]).collect())
            .collect();
        let y_rows = solve_dense(&transposed, &cb).unwrap_or_else(|| vec![0.0; m]);
        let mut y = vec![0.0; std.rows.len()];
        for (r, &sr) in self.row_ids.iter().enumerate() {
            y[sr] = y_rows[r];
        }
        x.truncate(std.num_struct);
        (x, y)
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        for i in col + 1..n {
            let f = m[i][col] / m[col][col];
            if f != 0.0 {
                for j in col..=n {
                    m[i][j] -= f * m[col][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn optimum(sol: LpSolution) -> Optimum {
        match sol {
            LpSolution::Optimal(o) => o,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn single_variable_box() {
        let mut lp = LpProblem::new(vec![1.0]).unwrap();
        lp.set_bounds(0, 0.0, 1.0).unwrap();
        let o = optimum(solve_lp(&lp).unwrap());
        assert_eq!(o.value, 0.0);
        assert_eq!(o.point, vec![0.0]);
    }

    #[test]
    fn symmetry_point() {
        let mut lp = LpProblem::new(vec![1.0, 0.0]).unwrap();
        lp.set_bounds(0, 0.0, 1.0)
            .unwrap()
            .set_bounds(1, 0.0, 1.0)
            .unwrap();
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0)
            .unwrap();
        lp.add_constraint(vec![1.0, -1.0], Relation::Ge, 0.0)
            .unwrap();
        let o = optimum(solve_lp(&lp).unwrap());
        assert_abs_diff_eq!(o.value, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(o.point[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn maximisation() {
        let mut lp = LpProblem::new(vec![1.0, 2.0]).unwrap();
        lp.add_constraint(vec![1.0, 1.0], Relation::Le, 4.0)
            .unwrap();
        lp.add_constraint(vec![1.0, 3.0], Relation::Le, 6.0)
            .unwrap();
        let o = optimum(solve_lp_max(&lp).unwrap());
        assert_abs_diff_eq!(o.value, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.point[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.point[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LpProblem::new(vec![1.0]).unwrap();
        lp.set_bounds(0, 0.0, 1.0).unwrap();
        lp.add_constraint(vec![1.0], Relation::Ge, 2.0).unwrap();
        assert_eq!(solve_lp(&lp).unwrap(), LpSolution::Infeasible);

        let mut lp = LpProblem::new(vec![-1.0, 0.0]).unwrap();
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0)
            .unwrap();
        assert_eq!(solve_lp(&lp).unwrap().status(), LpStatus::Unbounded);
    }

    #[test]
    fn free_and_upper_only_variables() {
        // min x + y, x free, y <= 3, x + y >= -2, x - y <= 1
        let mut lp = LpProblem::new(vec![1.0, 1.0]).unwrap();
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        lp.set_bounds(1, f64::NEG_INFINITY, 3.0).unwrap();
        lp.add_constraint(vec![1.0, 1.0], Relation::Ge, -2.0)
            .unwrap();
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0)
            .unwrap();
        let o = optimum(solve_lp(&lp).unwrap());
        assert_abs_diff_eq!(o.value, -2.0, epsilon = 1e-12);
        assert!(lp.max_violation(&o.point) < FEASIBILITY_TOL);
    }

    #[test]
    fn beale_degenerate_instance_terminates() {
        // Cycles under the textbook most-negative pivot rule.
        let mut lp = LpProblem::new(vec![-0.75, 20.0, -0.5, 6.0]).unwrap();
        lp.add_constraint(vec![0.25, -8.0, -1.0, 9.0], Relation::Le, 0.0)
            .unwrap();
        lp.add_constraint(vec![0.5, -12.0, -0.5, 3.0], Relation::Le, 0.0)
            .unwrap();
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0)
            .unwrap();
        let o = optimum(solve_lp(&lp).unwrap());
        assert_abs_diff_eq!(o.value, -1.25, epsilon = 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LpProblem::new(vec![1.0, 1.0]).unwrap();
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0)
            .unwrap();
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0)
            .unwrap();
        lp.add_constraint(vec![1.0, 0.0], Relation::Ge, 0.25)
            .unwrap();
        let o = optimum(solve_lp(&lp).unwrap());
        assert_abs_diff_eq!(o.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dual_bound(&lp, &o.duals), o.value, epsilon = 1e-9);
    }

    #[test]
    fn zero_rows() {
        let mut lp = LpProblem::new(vec![1.0]).unwrap();
        lp.add_constraint(vec![0.0], Relation::Le, 1.0).unwrap();
        assert_eq!(solve_lp(&lp).unwrap().value(), Some(0.0));
        lp.add_constraint(vec![0.0], Relation::Ge, 1.0).unwrap();
        assert_eq!(solve_lp(&lp).unwrap(), LpSolution::Infeasible);
    }

    #[test]
    fn duals_certify_the_optimum() {
        let mut lp = LpProblem::new(vec![2.0, 3.0, 1.0]).unwrap();
        for j in 0..3 {
            lp.set_bounds(j, 0.0, 5.0).unwrap();
        }
        lp.add_constraint(vec![1.0, 1.0, 1.0], Relation::Ge, 4.0)
            .unwrap();
        lp.add_constraint(vec![1.0, -1.0, 0.0], Relation::Le, 1.0)
            .unwrap();
        lp.add_constraint(vec![0.0, 1.0, -2.0], Relation::Eq, -3.0)
            .unwrap();
        let o = optimum(solve_lp(&lp).unwrap());
        assert_abs_diff_eq!(dual_bound(&lp, &o.duals), o.value, epsilon = 1e-9);
        assert!(o.duals[0] >= -1e-12);
        assert!(o.duals[1] <= 1e-12);
    }

    #[test]
    fn malformed_problems_rejected() {
        let mut lp = LpProblem::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            lp.add_constraint(vec![1.0], Relation::Le, 1.0),
            Err(LpError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            lp.set_bounds(0, 2.0, 1.0),
            Err(LpError::InvalidBounds { .. })
        ));
        assert!(matches!(
            lp.set_bounds(5, 0.0, 1.0),
            Err(LpError::InvalidBounds { .. })
        ));
        assert!(LpProblem::new(vec![f64::NAN]).is_err());
    }
}
