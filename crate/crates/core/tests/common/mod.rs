#![allow(dead_code)]

use std::path::PathBuf;

use markov_automata::{Distribution, GoalSet, MaBuilder, MarkovAutomaton};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture exists")
}

/// Shape of one random state: Markovian edges `(target, rate)` or a list
/// of distributions given as `(target, weight)`.
#[derive(Clone, Debug)]
pub enum StateSpec {
    Markovian(Vec<(usize, f64)>),
    Probabilistic(Vec<Vec<(usize, f64)>>),
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub states: Vec<StateSpec>,
    pub goal: Vec<usize>,
}

impl ModelSpec {
    pub fn build(&self) -> (MarkovAutomaton, GoalSet) {
        let mut b = MaBuilder::new();
        for s in 0..self.states.len() {
            b.add_state(format!("s{s}"));
        }
        b.set_initial(0);
        let act = [b.action("a"), b.action("b")];
        for (s, spec) in self.states.iter().enumerate() {
            match spec {
                StateSpec::Markovian(edges) => {
                    for &(t, r) in edges {
                        b.add_rate(s, t, r);
                    }
                }
                StateSpec::Probabilistic(alts) => {
                    for (i, alt) in alts.iter().enumerate() {
                        let total: f64 = alt.iter().map(|(_, w)| w).sum();
                        let d = Distribution::new(alt.iter().map(|&(t, w)| (t, w / total)))
                            .expect("normalised");
                        b.add_prob(s, act[i % 2], d);
                    }
                }
            }
        }
        for &g in &self.goal {
            b.add_label("goal", g);
        }
        let ma = b.build().expect("random model is well formed");
        let goal = GoalSet::new(self.goal.iter().copied(), "goal");
        (ma, goal)
    }
}

fn weighted_targets(
    targets: impl Strategy<Value = usize> + Clone,
) -> impl Strategy<Value = Vec<(usize, f64)>> {
    prop::collection::vec((targets, 1u32..=4), 1..=3).prop_map(|v| {
        let mut v: Vec<(usize, f64)> = v.into_iter().map(|(t, w)| (t, w as f64)).collect();
        v.sort_by_key(|e| e.0);
        v.dedup_by_key(|e| e.0);
        v
    })
}

/// Random non-Zeno model: probabilistic state `s` only moves to higher
/// indexed or Markovian states, so there is no cycle of probabilistic
/// states. Every state is Markovian or probabilistic, never both.
pub fn arb_model(max_states: usize) -> impl Strategy<Value = ModelSpec> {
    (2..=max_states)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(any::<bool>(), n),
                Just(n),
            )
        })
        .prop_flat_map(|(markovian, n)| {
            let mut markovian = markovian;
            // The last state has nowhere "higher" to go.
            markovian[n - 1] = true;
            let ms: Vec<usize> = (0..n).filter(|&s| markovian[s]).collect();
            let states: Vec<BoxedStrategy<StateSpec>> = (0..n)
                .map(|s| {
                    if markovian[s] {
                        prop::collection::vec((0..n, 1u32..=8), 1..=3)
                            .prop_map(|v| {
                                StateSpec::Markovian(
                                    v.into_iter().map(|(t, r)| (t, r as f64 * 0.5)).collect(),
                                )
                            })
                            .boxed()
                    } else {
                        let allowed: Vec<usize> =
                            (0..n).filter(|&t| t > s || markovian[t]).collect();
                        prop::collection::vec(weighted_targets(prop::sample::select(allowed)), 1..=2)
                            .prop_map(StateSpec::Probabilistic)
                            .boxed()
                    }
                })
                .collect();
            let goal = prop::collection::vec(prop::sample::select(ms.clone()), 0..=2);
            (states, goal)
        })
        .prop_map(|(states, mut goal)| {
            goal.sort_unstable();
            goal.dedup();
            ModelSpec { states, goal }
        })
}

/// Random unichain model: every choice puts mass on state 0, which is
/// Markovian and reaches every state in one step. Probabilistic states have
/// at most two actions.
pub fn arb_unichain(max_states: usize) -> impl Strategy<Value = ModelSpec> {
    (2..=max_states)
        .prop_flat_map(|n| (prop::collection::vec(any::<bool>(), n), Just(n)))
        .prop_flat_map(|(markovian, n)| {
            let states: Vec<BoxedStrategy<StateSpec>> = (0..n)
                .map(|s| {
                    if s == 0 {
                        prop::collection::vec(1u32..=8, n)
                            .prop_map(|rates| {
                                StateSpec::Markovian(
                                    rates.into_iter().enumerate().map(|(t, r)| (t, r as f64 * 0.5)).collect(),
                                )
                            })
                            .boxed()
                    } else if markovian[s] {
                        (1u32..=8, weighted_targets(0..n))
                            .prop_map(|(r0, rest)| {
                                let mut edges = vec![(0, r0 as f64 * 0.5)];
                                edges.extend(rest.into_iter().map(|(t, w)| (t, w * 0.5)));
                                StateSpec::Markovian(edges)
                            })
                            .boxed()
                    } else {
                        prop::collection::vec((1u32..=4, weighted_targets(1..n)), 1..=2)
                            .prop_map(|alts| {
                                StateSpec::Probabilistic(
                                    alts.into_iter()
                                        .map(|(w0, mut rest)| {
                                            rest.retain(|e| e.0 != 0);
                                            rest.insert(0, (0, w0 as f64));
                                            rest
                                        })
                                        .collect(),
                                )
                            })
                            .boxed()
                    }
                })
                .collect();
            let goal = prop::collection::vec(0..n, 0..=n);
            (states, goal)
        })
        .prop_map(|(states, mut goal)| {
            goal.sort_unstable();
            goal.dedup();
            ModelSpec { states, goal }
        })
}

/// Dense Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let d = a[col][col];
        assert!(d.abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / d;
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Long-run fraction of time in `goal` under every stationary deterministic
/// policy of a unichain model, by solving for the stationary distribution
/// of the embedded chain. Returns (min, max).
pub fn lra_by_enumeration(spec: &ModelSpec) -> (f64, f64) {
    let n = spec.states.len();
    let options: Vec<usize> = spec
        .states
        .iter()
        .map(|s| match s {
            StateSpec::Markovian(_) => 1,
            StateSpec::Probabilistic(alts) => alts.len(),
        })
        .collect();
    let mut choice = vec![0usize; n];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    loop {
        let mut p = vec![vec![0.0; n]; n];
        let mut residence = vec![0.0; n];
        for s in 0..n {
            match &spec.states[s] {
                StateSpec::Markovian(edges) => {
                    let e: f64 = edges.iter().map(|x| x.1).sum();
                    residence[s] = 1.0 / e;
                    for &(t, r) in edges {
                        p[s][t] += r / e;
                    }
                }
                StateSpec::Probabilistic(alts) => {
                    let alt = &alts[choice[s]];
                    let w: f64 = alt.iter().map(|x| x.1).sum();
                    for &(t, x) in alt {
                        p[s][t] += x / w;
                    }
                }
            }
        }
        // pi (P - I) = 0, sum pi = 1: replace the last equation.
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[j][i] = p[i][j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        a[n - 1] = vec![1.0; n];
        let mut rhs = vec![0.0; n];
        rhs[n - 1] = 1.0;
        let pi = solve_dense(a, rhs);
        let time: f64 = (0..n).map(|s| pi[s] * residence[s]).sum();
        let in_goal: f64 = spec.goal.iter().map(|&s| pi[s] * residence[s]).sum();
        let v = in_goal / time;
        lo = lo.min(v);
        hi = hi.max(v);

        let mut i = 0;
        loop {
            if i == n {
                return (lo, hi);
            }
            choice[i] += 1;
            if choice[i] < options[i] {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
