//! The built-in simplex solver on a small production-planning problem and on
//! an infeasible variant.
//!
//! Run with `cargo run --example simplex_lp`.

use photocert::lp::{solve_lp_max, LpProblem, LpSolution, Relation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // maximise 3x + 5y subject to x <= 4, 2y <= 12, 3x + 2y <= 18
    let mut lp = LpProblem::new(vec![3.0, 5.0])?;
    lp.add_constraint(vec![1.0, 0.0], Relation::Le, 4.0)?
        .add_constraint(vec![0.0, 2.0], Relation::Le, 12.0)?
        .add_constraint(vec![3.0, 2.0], Relation::Le, 18.0)?;
    match solve_lp_max(&lp)? {
        LpSolution::Optimal(o) => {
            println!(
                "optimum {} at {:?} after {} pivots",
                o.value, o.point, o.pivots
            );
            println!("row multipliers {:?}", o.duals);
        }
        other => println!("unexpected: {:?}", other.status()),
    }

    lp.add_constraint(vec![1.0, 1.0], Relation::Ge, 20.0)?;
    println!("with x + y >= 20: {:?}", solve_lp_max(&lp)?.status());
    Ok(())
}
