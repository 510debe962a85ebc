//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use photocert::lp::{LpProblem, Relation};
use rand::Rng;

/// Brute-force minimum of a box-bounded LP: every basic point is the
/// intersection of `n` hyperplanes taken from the rows and the box faces.
/// Returns `None` when no vertex is feasible.
pub fn vertex_enumeration_min(problem: &LpProblem) -> Option<f64> {
    let n = problem.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = problem
        .constraints()
        .iter()
        .map(|c| (c.coeffs.clone(), c.rhs))
        .collect();
    for (j, &(lo, hi)) in problem.bounds().iter().enumerate() {
        assert!(
            lo.is_finite() && hi.is_finite(),
            "oracle needs a finite box"
        );
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
    let mut best: Option<f64> = None;
    let mut chosen = Vec::with_capacity(n);
    enumerate(&planes, n, 0, &mut chosen, &mut |subset| {
        let a = DMatrix::from_fn(n, n, |r, c| planes[subset[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| planes[subset[r]].1);
        if a.determinant().abs() < 1e-10 {
            return;
        }
        let Some(x) = a.lu().solve(&b) else { return };
        let x: Vec<f64> = x.iter().copied().collect();
        if problem.max_violation(&x) <= 1e-9 {
            let value = problem.evaluate(&x);
            best = Some(best.map_or(value, |b: f64| b.min(value)));
        }
    });
    best
}

fn enumerate(
    planes: &[(Vec<f64>, f64)],
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    for i in start..planes.len() {
        chosen.push(i);
        enumerate(planes, k, i + 1, chosen, visit);
        chosen.pop();
    }
}

/// Dense LP with small integer data (degeneracy is common) and a finite box.
pub fn random_lp<R: Rng>(rng: &mut R, max_vars: usize, max_rows: usize) -> LpProblem {
    let n = rng.random_range(1..=max_vars);
    let m = rng.random_range(0..=max_rows);
    let objective = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
    let mut lp = LpProblem::new(objective).unwrap();
    for j in 0..n {
        let lo = rng.random_range(-3..=0) as f64;
        let hi = lo + rng.random_range(1..=5) as f64;
        lp.set_bounds(j, lo, hi).unwrap();
    }
    for _ in 0..m {
        let coeffs = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
        let relation = match rng.random_range(0..10) {
            0 => Relation::Eq,
            1..=5 => Relation::Le,
            _ => Relation::Ge,
        };
        let rhs = rng.random_range(-5..=10) as f64;
        lp.add_constraint(coeffs, relation, rhs).unwrap();
    }
    lp
}

/// A textbook instance on which Dantzig's rule cycles; optimum -5/4.
pub fn beale_problem() -> LpProblem {
    let mut lp = LpProblem::new(vec![-0.75, 20.0, -0.5, 6.0]).unwrap();
    lp.add_constraint(vec![0.25, -8.0, -1.0, 9.0], Relation::Le, 0.0)
        .unwrap();
    lp.add_constraint(vec![0.5, -12.0, -0.5, 3.0], Relation::Le, 0.0)
        .unwrap();
    lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0)
        .unwrap();
    lp
}
