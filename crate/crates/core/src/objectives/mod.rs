//! The analysis objectives. Every engine first hides all actions, applies
//! maximal progress and completes deadlocks; the caller's model is left
//! untouched.

pub mod expected_time;
pub mod lra;
pub mod timed;

pub use expected_time::{expected_time, ExpectedTimeQuery};
pub use lra::{lra, lra_quotient, lra_unichain, LraQuery, LraQuotient};
pub use timed::{
    build_dma, choose_delta, digitisation_error, timed_reachability, unbounded_reachability,
    DigitisedModel, DigitisedReach, Digitisation, Interval, TimedQuery,
};

use crate::graph;
use crate::matrix::{ChoiceOrigin, MdpView};
use crate::model::{GoalSet, MarkovAutomaton};
use crate::{Error, Result};

/// Which solver handles the stationary objectives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    #[default]
    ValueIteration,
    LinearProgram,
}

/// A model ready for analysis: closed, all-`tau`, without deadlocks.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub ma: MarkovAutomaton,
    pub notices: Vec<String>,
}

pub fn prepare(ma: &MarkovAutomaton) -> Prepared {
    let (ma_done, dead) = ma.hide_all_actions().complete_deadlocks();
    let mut notices = Vec::new();
    if !dead.is_empty() {
        let names: Vec<&str> = dead.iter().map(|&s| ma.state_name(s)).collect();
        notices.push(format!(
            "deadlock states given a rate-1 self-loop: {}",
            names.join(", ")
        ));
    }
    Prepared {
        ma: ma_done,
        notices,
    }
}

pub(crate) fn check_goal(ma: &MarkovAutomaton, goal: &GoalSet) -> Result<()> {
    match goal.states.iter().find(|&&s| s >= ma.num_states()) {
        Some(s) => Err(Error::InvalidQuery(format!("goal state {s} out of range"))),
        None => Ok(()),
    }
}

/// Fails if a reachable probabilistic end component lies in `region`.
pub(crate) fn reject_zeno(ma: &MarkovAutomaton, region: &[bool]) -> Result<()> {
    let bad: Vec<String> = graph::zeno_check(ma)
        .into_iter()
        .filter(|&s| region[s])
        .map(|s| ma.state_name(s).to_string())
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Zeno(bad))
    }
}

/// Human-readable label of a choice of `view` in terms of the original
/// (unhidden) model.
pub(crate) fn choice_label(original: &MarkovAutomaton, view: &MdpView, c: usize) -> String {
    match view.origin[c] {
        ChoiceOrigin::Markovian => "!".to_string(),
        ChoiceOrigin::Transition(i) => {
            let s = view.matrix.state_of_choice(c);
            let transitions = original.prob_transitions(s);
            let name = original.action_name(transitions[i].action);
            let clash = transitions
                .iter()
                .filter(|t| original.action_name(t.action) == name)
                .count();
            if clash > 1 {
                format!("{name}#{i}")
            } else {
                name.to_string()
            }
        }
    }
}

/// Policy of the probabilistic states only: Markovian states make no
/// decision.
pub(crate) fn policy_labels(
    original: &MarkovAutomaton,
    view: &MdpView,
    policy: &[Option<usize>],
) -> Vec<Option<String>> {
    policy
        .iter()
        .enumerate()
        .map(|(s, c)| match c {
            Some(c) if !view.is_markovian(s) => Some(choice_label(original, view, *c)),
            _ => None,
        })
        .collect()
}

pub(crate) fn transitions(ma: &MarkovAutomaton) -> usize {
    ma.num_prob_transitions() + ma.num_markov_edges()
}
