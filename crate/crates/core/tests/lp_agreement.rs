use markov_automata::solvers::lp::{simplex_solve, sparse_solve, LpProblem, LpStatus, Relation, Sense, VarBound};
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct RandomLp {
    sense: Sense,
    costs: Vec<(i32, bool)>,
    rows: Vec<(Vec<i32>, u8, i32)>,
}

/// Small integers with many zeros, so that degenerate vertices and ties
/// are common.
fn sparse_int(range: i32) -> impl Strategy<Value = i32> + Clone {
    prop_oneof![2 => Just(0), 3 => -range..=range]
}

fn arb_lp() -> impl Strategy<Value = RandomLp> {
    (1usize..=5, 1usize..=6).prop_flat_map(|(vars, rows)| {
        (
            prop_oneof![Just(Sense::Minimize), Just(Sense::Maximize)],
            prop::collection::vec((sparse_int(5), prop::bool::weighted(0.2)), vars),
            prop::collection::vec(
                (prop::collection::vec(sparse_int(4), vars), 0u8..3, sparse_int(10)),
                rows,
            ),
        )
            .prop_map(|(sense, costs, rows)| RandomLp { sense, costs, rows })
    })
}

fn build(spec: &RandomLp) -> LpProblem {
    let mut lp = LpProblem::new(spec.sense);
    let vars: Vec<usize> = spec
        .costs
        .iter()
        .map(|&(c, free)| lp.add_var(c as f64, if free { VarBound::Free } else { VarBound::NonNegative }))
        .collect();
    for (coeffs, rel, rhs) in &spec.rows {
        let rel = [Relation::Le, Relation::Ge, Relation::Eq][*rel as usize];
        let row: Vec<(usize, f64)> = vars.iter().zip(coeffs).map(|(&v, &a)| (v, a as f64)).collect();
        lp.add_constraint(row, rel, *rhs as f64);
    }
    lp
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dense_and_sparse_agree(spec in arb_lp()) {
        let lp = build(&spec);
        let dense = simplex_solve(&lp);
        let sparse = sparse_solve(&lp);
        prop_assert_eq!(dense.status, sparse.status);
        if dense.status == LpStatus::Optimal {
            prop_assert!((dense.objective - sparse.objective).abs() <= 1e-6 * (1.0 + dense.objective.abs()),
                "dense {} sparse {}", dense.objective, sparse.objective);
            prop_assert!(lp.max_violation(&dense.values) <= 1e-7);
        }
    }
}
