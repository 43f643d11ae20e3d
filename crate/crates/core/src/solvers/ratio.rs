//! Minimal long-run ratio of two costs in a unichain MDP.

use super::lp::{self, LpProblem, LpStatus, Relation, Sense, VarBound};
use super::SolverError;
use crate::matrix::ChoiceMatrix;

/// An MDP with two costs per choice. The minimal long-run ratio of
/// accumulated `c1` over accumulated `c2` is sought.
#[derive(Clone, Debug)]
pub struct RatioInstance {
    pub matrix: ChoiceMatrix,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioSolution {
    pub k: f64,
    /// Bias values witnessing the optimum of `k`.
    pub x: Vec<f64>,
}

impl RatioInstance {
    /// Slack of `x_s <= c1 - k c2 + sum P x` for every choice (negative
    /// means violated).
    pub fn slacks(&self, k: f64, x: &[f64]) -> Vec<f64> {
        let m = &self.matrix;
        (0..m.num_choices())
            .map(|c| {
                let s = m.state_of_choice(c);
                self.c1[c] - k * self.c2[c] + m.dot(c, x) - x[s]
            })
            .collect()
    }
}

/// Maximise `k` subject to `x_s <= c1(s,a) - k c2(s,a) + sum_t P(s,a,t) x_t`
/// with `k` and every `x_s` free. On a unichain instance the optimum is the
/// minimal long-run ratio from every state.
pub fn longrun_ratio_min(inst: &RatioInstance) -> Result<RatioSolution, SolverError> {
    let m = &inst.matrix;
    let n = m.num_states();
    let mut problem = LpProblem::new(Sense::Maximize);
    for _ in 0..n {
        problem.add_var(0.0, VarBound::Free);
    }
    let k = problem.add_var(1.0, VarBound::Free);
    for s in 0..n {
        for c in m.choices(s) {
            let mut coeffs = vec![(s, 1.0), (k, inst.c2[c])];
            coeffs.extend(m.entries(c).map(|(t, p)| (t, -p)));
            problem.add_constraint(coeffs, Relation::Le, inst.c1[c]);
        }
    }
    // The bias is only determined up to a constant; pin one entry so the
    // program has a vertex optimum.
    if n > 0 {
        problem.add_constraint([(0, 1.0)], Relation::Eq, 0.0);
    }
    let sol = lp::solve(&problem);
    if sol.status != LpStatus::Optimal {
        return Err(SolverError::Lp(sol.status));
    }
    let mut x = sol.values;
    let k = x.pop().expect("k variable");
    Ok(RatioSolution { k, x })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle(c1: [f64; 2]) -> RatioInstance {
        let mut b = ChoiceMatrix::builder();
        b.push_choice([(1, 1.0)]).finish_state();
        b.push_choice([(0, 1.0)]).finish_state();
        RatioInstance {
            matrix: b.build(),
            c1: c1.to_vec(),
            c2: vec![1.0, 1.0 / 3.0],
        }
    }

    #[test]
    fn steady_state_fraction() {
        let sol = longrun_ratio_min(&two_cycle([1.0, 0.0])).unwrap();
        assert!((sol.k - 0.75).abs() < 1e-12);
    }

    #[test]
    fn identical_costs() {
        let sol = longrun_ratio_min(&two_cycle([1.0, 1.0 / 3.0])).unwrap();
        assert!((sol.k - 1.0).abs() < 1e-12);
    }
}
