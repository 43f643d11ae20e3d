//! Compressed nondeterministic transition matrices.
//!
//! Every state owns a contiguous range of choices and every choice a
//! contiguous range of `(target, probability)` entries. This is the common
//! input of the graph algorithms and the numeric solvers.

use std::ops::Range;

use crate::model::{MarkovAutomaton, StateClass};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChoiceMatrix {
    state_starts: Vec<usize>,
    choice_starts: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
}

impl ChoiceMatrix {
    pub fn builder() -> ChoiceMatrixBuilder {
        ChoiceMatrixBuilder::default()
    }

    pub fn num_states(&self) -> usize {
        self.state_starts.len() - 1
    }

    pub fn num_choices(&self) -> usize {
        self.choice_starts.len() - 1
    }

    pub fn num_entries(&self) -> usize {
        self.targets.len()
    }

    pub fn choices(&self, s: usize) -> Range<usize> {
        self.state_starts[s]..self.state_starts[s + 1]
    }

    pub fn targets(&self, c: usize) -> &[usize] {
        &self.targets[self.choice_starts[c]..self.choice_starts[c + 1]]
    }

    pub fn probs(&self, c: usize) -> &[f64] {
        &self.probs[self.choice_starts[c]..self.choice_starts[c + 1]]
    }

    pub fn entries(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.targets(c)
            .iter()
            .copied()
            .zip(self.probs(c).iter().copied())
    }

    /// `sum_t P(c, t) * v[t]`, summed in stored order.
    #[inline]
    pub fn dot(&self, c: usize, v: &[f64]) -> f64 {
        let range = self.choice_starts[c]..self.choice_starts[c + 1];
        let mut acc = 0.0;
        for (t, p) in self.targets[range.clone()].iter().zip(&self.probs[range]) {
            acc += p * v[*t];
        }
        acc
    }

    /// State owning choice `c`.
    pub fn state_of_choice(&self, c: usize) -> usize {
        self.state_starts.partition_point(|&start| start <= c) - 1
    }

    /// Successor lists over all choices, deduplicated.
    pub fn successor_lists(&self) -> Vec<Vec<usize>> {
        (0..self.num_states())
            .map(|s| {
                let mut succ: Vec<usize> = self
                    .choices(s)
                    .flat_map(|c| self.targets(c).iter().copied())
                    .collect();
                succ.sort_unstable();
                succ.dedup();
                succ
            })
            .collect()
    }
}

#[derive(Debug)]
pub struct ChoiceMatrixBuilder {
    matrix: ChoiceMatrix,
}

impl Default for ChoiceMatrixBuilder {
    fn default() -> Self {
        ChoiceMatrixBuilder {
            matrix: ChoiceMatrix {
                state_starts: vec![0],
                choice_starts: vec![0],
                targets: Vec::new(),
                probs: Vec::new(),
            },
        }
    }
}

impl ChoiceMatrixBuilder {
    /// Appends a choice to the state currently being built.
    pub fn push_choice(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) -> &mut Self {
        for (t, p) in entries {
            self.matrix.targets.push(t);
            self.matrix.probs.push(p);
        }
        self.matrix.choice_starts.push(self.matrix.targets.len());
        self
    }

    /// Closes the current state.
    pub fn finish_state(&mut self) -> &mut Self {
        let choices = self.matrix.choice_starts.len() - 1;
        self.matrix.state_starts.push(choices);
        self
    }

    pub fn build(self) -> ChoiceMatrix {
        self.matrix
    }
}

/// Where a choice of an [`MdpView`] comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChoiceOrigin {
    /// The bundle of Markovian transitions of a Markovian state.
    Markovian,
    /// Probabilistic transition with this index in the state's list.
    Transition(usize),
}

/// The time-abstract MDP underlying a closed Markov automaton: Markovian
/// states get one choice distributed by `R(s, .)/E(s)`, probabilistic
/// states one choice per transition.
#[derive(Clone, Debug)]
pub struct MdpView {
    pub matrix: ChoiceMatrix,
    pub origin: Vec<ChoiceOrigin>,
    /// `E(s)` for Markovian states, `None` for probabilistic ones.
    pub exit_rates: Vec<Option<f64>>,
}

impl MdpView {
    /// Requires a closed model. Deadlock states get no choice at all.
    pub fn new(ma: &MarkovAutomaton) -> Self {
        let mut b = ChoiceMatrix::builder();
        let mut origin = Vec::new();
        let mut exit_rates = Vec::with_capacity(ma.num_states());
        for s in 0..ma.num_states() {
            match ma.state_class(s) {
                StateClass::Markovian => {
                    b.push_choice(ma.embedded_probs(s).entries().iter().copied());
                    origin.push(ChoiceOrigin::Markovian);
                    exit_rates.push(Some(ma.exit_rate(s)));
                }
                StateClass::Probabilistic => {
                    for (i, t) in ma.prob_transitions(s).iter().enumerate() {
                        b.push_choice(t.distribution.entries().iter().copied());
                        origin.push(ChoiceOrigin::Transition(i));
                    }
                    exit_rates.push(None);
                }
                StateClass::Deadlock => exit_rates.push(None),
            }
            b.finish_state();
        }
        MdpView {
            matrix: b.build(),
            origin,
            exit_rates,
        }
    }

    pub fn is_markovian(&self, s: usize) -> bool {
        self.exit_rates[s].is_some()
    }
}
