//! The LP layer on its own: a small production problem, solved by the
//! dense simplex and by the interior point backend.
//!
//! `cargo run --example linear_program`

use markov_automata::solvers::lp::{simplex_solve, sparse_solve, LpProblem, Relation, Sense, VarBound};

fn main() {
    // max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18
    let mut lp = LpProblem::new(Sense::Maximize);
    let x = lp.add_var(3.0, VarBound::NonNegative);
    let y = lp.add_var(5.0, VarBound::NonNegative);
    lp.add_constraint(vec![(x, 1.0)], Relation::Le, 4.0);
    lp.add_constraint(vec![(y, 2.0)], Relation::Le, 12.0);
    lp.add_constraint(vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
    for (name, sol) in [("simplex", simplex_solve(&lp)), ("interior point", sparse_solve(&lp))] {
        println!("{name}: {} objective {:.6} at {:?}", sol.status, sol.objective, sol.values);
    }
}
