//! Optimal expected terminal value in an MDP: the probabilistic part of a
//! model is swept in topological order of its SCCs, exact on acyclic parts
//! and by Gauss-Seidel iteration inside cyclic components.

use super::{Direction, ValueVector, VI_ITERATION_CAP};
use crate::graph::tarjan;
use crate::matrix::ChoiceMatrix;

/// Evaluation order of the non-terminal states. Reusable as long as the
/// matrix and the terminal set stay the same.
#[derive(Clone, Debug)]
pub struct ReachOrder {
    /// SCCs, successors before predecessors.
    components: Vec<Vec<usize>>,
    /// Whether the component contains a cycle.
    cyclic: Vec<bool>,
}

impl ReachOrder {
    pub fn new(m: &ChoiceMatrix, terminal: &[bool]) -> Self {
        let active: Vec<bool> = terminal.iter().map(|t| !t).collect();
        let succ: Vec<Vec<usize>> = (0..m.num_states())
            .map(|s| {
                if terminal[s] {
                    return Vec::new();
                }
                let mut v: Vec<usize> = m
                    .choices(s)
                    .flat_map(|c| m.targets(c).iter().copied())
                    .filter(|&t| !terminal[t])
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let components = tarjan(&succ, &active);
        let cyclic = components
            .iter()
            .map(|comp| comp.len() > 1 || succ[comp[0]].contains(&comp[0]))
            .collect();
        ReachOrder { components, cyclic }
    }

    pub fn has_cycles(&self) -> bool {
        self.cyclic.iter().any(|&c| c)
    }

    /// Overwrites the non-terminal entries of `values` with their optimal
    /// expected terminal value; terminal entries are read only. Returns the
    /// number of sweeps spent inside cyclic components.
    pub fn solve(
        &self,
        m: &ChoiceMatrix,
        values: &mut [f64],
        dir: Direction,
        tol: f64,
        mut policy: Option<&mut [Option<usize>]>,
    ) -> usize {
        let mut sweeps = 0;
        for (comp, &cyclic) in self.components.iter().zip(&self.cyclic) {
            if !cyclic {
                let s = comp[0];
                let (v, arg) = best_choice(m, s, values, dir);
                values[s] = v;
                if let Some(p) = policy.as_deref_mut() {
                    p[s] = arg;
                }
                continue;
            }
            for &s in comp {
                values[s] = 0.0;
            }
            let mut local = 0;
            loop {
                let mut delta: f64 = 0.0;
                for &s in comp {
                    let (v, _) = best_choice(m, s, values, dir);
                    delta = delta.max((v - values[s]).abs());
                    values[s] = v;
                }
                local += 1;
                if delta <= tol || local >= VI_ITERATION_CAP {
                    break;
                }
            }
            sweeps += local;
            if let Some(p) = policy.as_deref_mut() {
                for &s in comp {
                    p[s] = best_choice(m, s, values, dir).1;
                }
            }
        }
        sweeps
    }
}

#[inline]
fn best_choice(m: &ChoiceMatrix, s: usize, v: &[f64], dir: Direction) -> (f64, Option<usize>) {
    let mut best = 0.0;
    let mut arg = None;
    for c in m.choices(s) {
        let q = m.dot(c, v);
        if arg.is_none() || dir.better(q, best) {
            best = q;
            arg = Some(c);
        }
    }
    (best, arg)
}

/// Optimal expected terminal value: `terminal_values[s]` is collected on
/// reaching a terminal state, nothing if none is ever reached. States
/// without choices that are not terminal get 0.
pub fn mdp_reach(
    m: &ChoiceMatrix,
    terminal: &[bool],
    terminal_values: &[f64],
    dir: Direction,
    tol: f64,
) -> ValueVector {
    let order = ReachOrder::new(m, terminal);
    let mut values: Vec<f64> = (0..m.num_states())
        .map(|s| if terminal[s] { terminal_values[s] } else { 0.0 })
        .collect();
    let mut policy = vec![None; m.num_states()];
    let iterations = order.solve(m, &mut values, dir, tol, Some(&mut policy));
    ValueVector {
        values,
        direction: dir,
        iterations,
        residual: if order.has_cycles() { tol } else { 0.0 },
        policy,
    }
}
