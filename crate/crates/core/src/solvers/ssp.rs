//! Stochastic shortest path problems with non-negative costs.

use super::lp::{self, LpProblem, Relation, Sense, VarBound};
use super::{Direction, SolverError, ValueVector, VI_ITERATION_CAP};
use crate::matrix::ChoiceMatrix;

/// An SSP: stage cost per choice, terminal cost per goal state.
#[derive(Clone, Debug)]
pub struct SspInstance {
    pub matrix: ChoiceMatrix,
    /// `c(s, a)` indexed by global choice.
    pub costs: Vec<f64>,
    pub goal: Vec<bool>,
    /// `g(s)`; only read for goal states.
    pub terminal: Vec<f64>,
}

impl SspInstance {
    pub fn num_states(&self) -> usize {
        self.matrix.num_states()
    }

    fn check(&self) -> Result<(), SolverError> {
        for s in 0..self.num_states() {
            if !self.goal[s] && self.matrix.choices(s).is_empty() {
                return Err(SolverError::MissingChoice(s));
            }
        }
        Ok(())
    }

    #[inline]
    fn q_value(&self, c: usize, v: &[f64]) -> f64 {
        self.costs[c] + self.matrix.dot(c, v)
    }

    /// One application of the Bellman operator with the greedy choice.
    fn apply(&self, dir: Direction, v: &[f64], out: &mut [f64], policy: &mut [Option<usize>]) {
        for s in 0..self.num_states() {
            if self.goal[s] {
                out[s] = self.terminal[s];
                policy[s] = None;
                continue;
            }
            let mut best = dir.worst();
            let mut arg = None;
            for c in self.matrix.choices(s) {
                let q = self.q_value(c, v);
                if arg.is_none() || dir.better(q, best) {
                    best = q;
                    arg = Some(c);
                }
            }
            out[s] = best;
            policy[s] = arg;
        }
    }
}

/// Jacobi value iteration from zero; stops when the max-norm update is at
/// most `tol`.
pub fn ssp_value_iteration(
    inst: &SspInstance,
    dir: Direction,
    tol: f64,
) -> Result<ValueVector, SolverError> {
    inst.check()?;
    let n = inst.num_states();
    let mut v: Vec<f64> = (0..n)
        .map(|s| if inst.goal[s] { inst.terminal[s] } else { 0.0 })
        .collect();
    let mut next = vec![0.0; n];
    let mut policy = vec![None; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < VI_ITERATION_CAP {
        inst.apply(dir, &v, &mut next, &mut policy);
        iterations += 1;
        residual = 0.0;
        for (new, old) in next.iter().zip(&v) {
            assert!(
                *new >= *old,
                "value iteration lost monotonicity: {new} < {old}"
            );
            residual = f64::max(residual, new - old);
        }
        std::mem::swap(&mut v, &mut next);
        if residual <= tol {
            // Extract the policy greedily w.r.t. the final vector.
            inst.apply(dir, &v, &mut next, &mut policy);
            return Ok(ValueVector {
                values: v,
                direction: dir,
                iterations,
                residual,
                policy,
            });
        }
    }
    Err(SolverError::NonConvergence {
        iterations,
        residual,
    })
}

/// Solves the SSP as a linear program. For `Min`, maximise `sum v` under
/// `v_s <= c(s,a) + sum P v`; `Max` is the mirror image.
pub fn ssp_lp(inst: &SspInstance, dir: Direction) -> Result<ValueVector, SolverError> {
    inst.check()?;
    let n = inst.num_states();
    let m = &inst.matrix;
    let (sense, rel) = match dir {
        Direction::Min => (Sense::Maximize, Relation::Le),
        Direction::Max => (Sense::Minimize, Relation::Ge),
    };
    let mut problem = LpProblem::new(sense);
    // Only non-goal states get a variable; goal values are constants.
    let mut var = vec![usize::MAX; n];
    for s in (0..n).filter(|&s| !inst.goal[s]) {
        var[s] = problem.add_var(1.0, VarBound::NonNegative);
    }
    for s in (0..n).filter(|&s| !inst.goal[s]) {
        for c in m.choices(s) {
            let mut coeffs = vec![(var[s], 1.0)];
            let mut rhs = inst.costs[c];
            for (t, p) in m.entries(c) {
                if inst.goal[t] {
                    rhs += p * inst.terminal[t];
                } else {
                    coeffs.push((var[t], -p));
                }
            }
            problem.add_constraint(coeffs, rel, rhs);
        }
    }
    let sol = lp::solve(&problem);
    if sol.status != lp::LpStatus::Optimal {
        return Err(SolverError::Lp(sol.status));
    }
    let values: Vec<f64> = (0..n)
        .map(|s| {
            if inst.goal[s] {
                inst.terminal[s]
            } else {
                sol.values[var[s]]
            }
        })
        .collect();
    let mut scratch = vec![0.0; n];
    let mut policy = vec![None; n];
    inst.apply(dir, &values, &mut scratch, &mut policy);
    Ok(ValueVector {
        values,
        direction: dir,
        iterations: 0,
        residual: 0.0,
        policy,
    })
}

/// `max_s |L(v)(s) - v(s)|` over states with finite value.
pub fn bellman_residual(inst: &SspInstance, dir: Direction, v: &[f64]) -> f64 {
    let n = inst.num_states();
    let mut out = vec![0.0; n];
    let mut policy = vec![None; n];
    inst.apply(dir, v, &mut out, &mut policy);
    out.iter()
        .zip(v)
        .filter(|(_, x)| x.is_finite())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> SspInstance {
        let mut b = ChoiceMatrix::builder();
        b.push_choice([(1, 1.0)]).finish_state();
        b.finish_state();
        SspInstance {
            matrix: b.build(),
            costs: vec![0.5],
            goal: vec![false, true],
            terminal: vec![0.0, 0.0],
        }
    }

    #[test]
    fn two_state_chain() {
        let vi = ssp_value_iteration(&chain(), Direction::Min, 1e-8).unwrap();
        assert_eq!(vi.values, vec![0.5, 0.0]);
        assert_eq!(vi.iterations, 2);
        let lp = ssp_lp(&chain(), Direction::Min).unwrap();
        assert!((lp.values[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn terminal_cost_passthrough() {
        let mut inst = chain();
        inst.terminal[1] = 7.0;
        let vi = ssp_value_iteration(&inst, Direction::Max, 1e-8).unwrap();
        assert_eq!(vi.values, vec![7.5, 7.0]);
    }

    #[test]
    fn policy_prefers_lowest_index_on_ties() {
        let mut b = ChoiceMatrix::builder();
        b.push_choice([(1, 1.0)]).push_choice([(1, 1.0)]).finish_state();
        b.finish_state();
        let inst = SspInstance {
            matrix: b.build(),
            costs: vec![1.0, 1.0],
            goal: vec![false, true],
            terminal: vec![0.0, 0.0],
        };
        for dir in [Direction::Min, Direction::Max] {
            let vi = ssp_value_iteration(&inst, dir, 1e-8).unwrap();
            assert_eq!(vi.policy[0], Some(0));
        }
    }
}
