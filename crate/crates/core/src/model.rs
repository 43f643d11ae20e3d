//! The Markov automaton data model.
//!
//! A [`MarkovAutomaton`] has a finite set of states `0..n`, an initial state,
//! probabilistic transitions labelled with actions (each leading to a
//! [`Distribution`]) and Markovian transitions carrying exponential rates.
//! Action index 0 is always the internal action `tau`.
//!
//! Instances are immutable once built. Use [`MaBuilder`] to construct them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::graph;

/// Tolerance on the total mass of a distribution.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Deviations below this are left alone instead of re-normalised, so that a
/// re-normalised distribution stays bit-identical on re-parse.
const RENORMALIZE_THRESHOLD: f64 = 1e-12;

/// Name of the internal action.
pub const TAU_NAME: &str = "tau";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub usize);

/// The internal action.
pub const TAU: ActionId = ActionId(0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("distribution sums to {sum} (expected 1 within {PROB_SUM_TOLERANCE:e})")]
    Unnormalized { sum: f64 },
    #[error("invalid probability {prob} for target {target}")]
    InvalidProbability { target: usize, prob: f64 },
    #[error("empty distribution")]
    EmptyDistribution,
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// A discrete probability distribution over state indices.
///
/// Entries are sorted by target, strictly positive and free of duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    entries: Vec<(usize, f64)>,
}

impl Distribution {
    /// Builds a checked distribution. Zero-probability branches are dropped,
    /// duplicate targets are merged, and a total within [`PROB_SUM_TOLERANCE`]
    /// of one is accepted (and re-normalised).
    pub fn new(entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self, ModelError> {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (target, prob) in entries {
            if !prob.is_finite() || !(0.0..=1.0 + PROB_SUM_TOLERANCE).contains(&prob) {
                return Err(ModelError::InvalidProbability { target, prob });
            }
            if prob > 0.0 {
                *merged.entry(target).or_insert(0.0) += prob;
            }
        }
        if merged.is_empty() {
            return Err(ModelError::EmptyDistribution);
        }
        let mut entries: Vec<(usize, f64)> = merged.into_iter().collect();
        let sum: f64 = entries.iter().map(|e| e.1).sum();
        let deviation = (sum - 1.0).abs();
        if deviation > PROB_SUM_TOLERANCE {
            return Err(ModelError::Unnormalized { sum });
        }
        if deviation > RENORMALIZE_THRESHOLD {
            for e in &mut entries {
                e.1 /= sum;
            }
        }
        Ok(Distribution { entries })
    }

    /// Point mass on `target`.
    pub fn dirac(target: usize) -> Self {
        Distribution {
            entries: vec![(target, 1.0)],
        }
    }

    /// Wraps raw entries without any checks. Intended for tests and for
    /// feeding deliberately broken models to [`validate`].
    pub fn from_raw(entries: Vec<(usize, f64)>) -> Self {
        Distribution { entries }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn prob(&self, target: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.0 == target)
            .map(|e| e.1)
            .sum()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbTransition {
    pub action: ActionId,
    pub distribution: Distribution,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkovEdge {
    pub target: usize,
    pub rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateClass {
    Markovian,
    Probabilistic,
    Deadlock,
}

/// A set of goal states together with a description of where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GoalSet {
    pub states: BTreeSet<usize>,
    pub source: String,
}

impl GoalSet {
    pub fn new(states: impl IntoIterator<Item = usize>, source: impl Into<String>) -> Self {
        GoalSet {
            states: states.into_iter().collect(),
            source: source.into(),
        }
    }

    pub fn contains(&self, s: usize) -> bool {
        self.states.contains(&s)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Dense membership mask over `n` states.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &s in &self.states {
            if s < n {
                mask[s] = true;
            }
        }
        mask
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovAutomaton {
    initial: usize,
    actions: Vec<String>,
    state_names: Vec<String>,
    prob: Vec<Vec<ProbTransition>>,
    markov: Vec<Vec<MarkovEdge>>,
    labels: BTreeMap<String, BTreeSet<usize>>,
}

impl MarkovAutomaton {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.0]
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.state_names[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn prob_transitions(&self, s: usize) -> &[ProbTransition] {
        &self.prob[s]
    }

    pub fn markov_edges(&self, s: usize) -> &[MarkovEdge] {
        &self.markov[s]
    }

    pub fn labels(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.labels
    }

    pub fn label(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.labels.get(name)
    }

    pub fn num_prob_transitions(&self) -> usize {
        self.prob.iter().map(Vec::len).sum()
    }

    pub fn num_markov_edges(&self) -> usize {
        self.markov.iter().map(Vec::len).sum()
    }

    /// Classification of `s`. Meaningful on closed models; on unclosed input
    /// a state with both kinds of transitions counts as probabilistic.
    pub fn state_class(&self, s: usize) -> StateClass {
        if !self.prob[s].is_empty() {
            StateClass::Probabilistic
        } else if !self.markov[s].is_empty() {
            StateClass::Markovian
        } else {
            StateClass::Deadlock
        }
    }

    pub fn is_markovian(&self, s: usize) -> bool {
        self.state_class(s) == StateClass::Markovian
    }

    pub fn is_probabilistic(&self, s: usize) -> bool {
        self.state_class(s) == StateClass::Probabilistic
    }

    pub fn has_tau(&self, s: usize) -> bool {
        self.prob[s].iter().any(|t| t.action == TAU)
    }

    /// Whether every state obeys maximal progress.
    pub fn is_closed(&self) -> bool {
        (0..self.num_states()).all(|s| !(self.has_tau(s) && !self.markov[s].is_empty()))
    }

    /// Direct successors over all transitions.
    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.prob[s]
            .iter()
            .flat_map(|t| t.distribution.support())
            .chain(self.markov[s].iter().map(|e| e.target))
    }

    /// Total outgoing rate `E(s)`.
    ///
    /// Panics if `s` is not a Markovian state.
    pub fn exit_rate(&self, s: usize) -> f64 {
        assert!(
            self.state_class(s) == StateClass::Markovian,
            "exit_rate queried on non-Markovian state {s}"
        );
        self.markov[s].iter().map(|e| e.rate).sum()
    }

    /// Aggregated rate `R(s, target)` over parallel edges.
    pub fn rate(&self, s: usize, target: usize) -> f64 {
        self.markov[s]
            .iter()
            .filter(|e| e.target == target)
            .map(|e| e.rate)
            .sum()
    }

    /// Branching probabilities `R(s, s') / E(s)` of a Markovian state.
    ///
    /// Panics if `s` is not a Markovian state.
    pub fn embedded_probs(&self, s: usize) -> Distribution {
        let exit = self.exit_rate(s);
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for e in &self.markov[s] {
            *merged.entry(e.target).or_insert(0.0) += e.rate;
        }
        Distribution::from_raw(merged.into_iter().map(|(t, r)| (t, r / exit)).collect())
    }

    /// Largest exit rate over all Markovian states (0 if there are none).
    pub fn max_exit_rate(&self) -> f64 {
        (0..self.num_states())
            .filter(|&s| self.is_markovian(s))
            .map(|s| self.exit_rate(s))
            .fold(0.0, f64::max)
    }

    pub fn deadlock_states(&self) -> Vec<usize> {
        (0..self.num_states())
            .filter(|&s| self.state_class(s) == StateClass::Deadlock)
            .collect()
    }

    /// Removes the Markovian transitions of every state that enables `tau`.
    pub fn close_maximal_progress(&self) -> MarkovAutomaton {
        let mut closed = self.clone();
        for s in 0..closed.num_states() {
            if closed.has_tau(s) {
                closed.markov[s].clear();
            }
        }
        closed
    }

    /// Relabels every probabilistic transition with `tau`, then closes.
    ///
    /// The action table is kept so labels remain available for reporting;
    /// transition order within a state is preserved.
    pub fn hide_all_actions(&self) -> MarkovAutomaton {
        let mut hidden = self.clone();
        for transitions in &mut hidden.prob {
            for t in transitions {
                t.action = TAU;
            }
        }
        hidden.close_maximal_progress()
    }

    /// Gives every deadlock state a rate-1 Markovian self-loop.
    /// Returns the completed model and the affected states.
    pub fn complete_deadlocks(&self) -> (MarkovAutomaton, Vec<usize>) {
        let dead = self.deadlock_states();
        let mut completed = self.clone();
        for &s in &dead {
            completed.markov[s].push(MarkovEdge {
                target: s,
                rate: 1.0,
            });
        }
        (completed, dead)
    }

    /// Copy of this model in which every state of `goal` is an absorbing
    /// Markovian state (a rate-1 self-loop and nothing else).
    pub fn make_absorbing(&self, goal: &GoalSet) -> MarkovAutomaton {
        let mut m = self.clone();
        for &s in &goal.states {
            m.prob[s].clear();
            m.markov[s] = vec![MarkovEdge {
                target: s,
                rate: 1.0,
            }];
        }
        m
    }

    /// Copy with every rate multiplied by `factor`.
    pub fn scale_rates(&self, factor: f64) -> MarkovAutomaton {
        let mut m = self.clone();
        for edges in &mut m.markov {
            for e in edges {
                e.rate *= factor;
            }
        }
        m
    }

    /// The initial state plus all states reachable from it.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for t in self.successors(s) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

/// Single-owner builder for [`MarkovAutomaton`].
#[derive(Debug, Clone)]
pub struct MaBuilder {
    initial: usize,
    actions: Vec<String>,
    action_index: HashMap<String, ActionId>,
    state_names: Vec<String>,
    prob: Vec<Vec<ProbTransition>>,
    markov: Vec<Vec<MarkovEdge>>,
    labels: BTreeMap<String, BTreeSet<usize>>,
}

impl Default for MaBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl MaBuilder {
    pub fn new() -> Self {
        let mut action_index = HashMap::new();
        action_index.insert(TAU_NAME.to_string(), TAU);
        MaBuilder {
            initial: 0,
            actions: vec![TAU_NAME.to_string()],
            action_index,
            state_names: Vec::new(),
            prob: Vec::new(),
            markov: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    /// Builder with `n` states named `s0..s{n-1}`.
    pub fn with_states(n: usize) -> Self {
        let mut b = Self::new();
        for i in 0..n {
            b.add_state(format!("s{i}"));
        }
        b
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> usize {
        self.state_names.push(name.into());
        self.prob.push(Vec::new());
        self.markov.push(Vec::new());
        self.state_names.len() - 1
    }

    pub fn set_initial(&mut self, s: usize) -> &mut Self {
        self.initial = s;
        self
    }

    /// Interns an action label; `"tau"` maps to [`TAU`].
    pub fn action(&mut self, name: &str) -> ActionId {
        if let Some(&a) = self.action_index.get(name) {
            return a;
        }
        let id = ActionId(self.actions.len());
        self.actions.push(name.to_string());
        self.action_index.insert(name.to_string(), id);
        id
    }

    pub fn add_prob(&mut self, s: usize, action: ActionId, distribution: Distribution) -> &mut Self {
        self.prob[s].push(ProbTransition {
            action,
            distribution,
        });
        self
    }

    pub fn add_tau(&mut self, s: usize, distribution: Distribution) -> &mut Self {
        self.add_prob(s, TAU, distribution)
    }

    pub fn add_rate(&mut self, s: usize, target: usize, rate: f64) -> &mut Self {
        self.markov[s].push(MarkovEdge { target, rate });
        self
    }

    pub fn add_label(&mut self, label: &str, s: usize) -> &mut Self {
        self.labels.entry(label.to_string()).or_default().insert(s);
        self
    }

    /// Declares a label even if no state carries it.
    pub fn declare_label(&mut self, label: &str) -> &mut Self {
        self.labels.entry(label.to_string()).or_default();
        self
    }

    /// Builds without validation. Markovian edges are sorted by target
    /// (stable, so parallel edges keep their relative order).
    pub fn build_unchecked(self) -> MarkovAutomaton {
        let mut markov = self.markov;
        for edges in &mut markov {
            edges.sort_by_key(|e| e.target);
        }
        MarkovAutomaton {
            initial: self.initial,
            actions: self.actions,
            state_names: self.state_names,
            prob: self.prob,
            markov,
            labels: self.labels,
        }
    }

    /// Builds and rejects models with error-level diagnostics.
    pub fn build(self) -> Result<MarkovAutomaton, ModelError> {
        let ma = self.build_unchecked();
        let errors: Vec<String> = validate(&ma)
            .into_iter()
            .filter(|d| d.severity == Severity::Error)
            .map(|d| d.to_string())
            .collect();
        if errors.is_empty() {
            Ok(ma)
        } else {
            Err(ModelError::Invalid(errors.join("; ")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    /// Informational: the model is usable as is.
    Notice,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Notice => "notice",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DiagnosticKind {
    InitialOutOfRange { initial: usize },
    DanglingTarget { state: usize, target: usize },
    DanglingLabel { label: String, state: usize },
    EmptyDistribution { state: usize, transition: usize },
    InvalidProbability { state: usize, transition: usize, target: usize, prob: f64 },
    DuplicateTarget { state: usize, transition: usize, target: usize },
    Unnormalized { state: usize, transition: usize, sum: f64 },
    NonPositiveRate { state: usize, target: usize, rate: f64 },
    /// Markovian transitions that maximal progress will discard.
    PreemptedRates { state: usize },
    /// No transitions at all; objectives give it a rate-1 self-loop.
    Deadlock { state: usize },
    /// Reachable end component made of probabilistic states only.
    Zeno { states: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.severity)?;
        match &self.kind {
            DiagnosticKind::InitialOutOfRange { initial } => {
                write!(f, "initial state {initial} out of range")
            }
            DiagnosticKind::DanglingTarget { state, target } => {
                write!(f, "state {state} has transition to unknown state {target}")
            }
            DiagnosticKind::DanglingLabel { label, state } => {
                write!(f, "label '{label}' refers to unknown state {state}")
            }
            DiagnosticKind::EmptyDistribution { state, transition } => {
                write!(f, "state {state}, transition {transition}: empty distribution")
            }
            DiagnosticKind::InvalidProbability {
                state,
                transition,
                target,
                prob,
            } => write!(
                f,
                "state {state}, transition {transition}: invalid probability {prob} for target {target}"
            ),
            DiagnosticKind::DuplicateTarget {
                state,
                transition,
                target,
            } => write!(
                f,
                "state {state}, transition {transition}: duplicate target {target}"
            ),
            DiagnosticKind::Unnormalized {
                state,
                transition,
                sum,
            } => write!(
                f,
                "state {state}, transition {transition}: distribution sums to {sum}"
            ),
            DiagnosticKind::NonPositiveRate {
                state,
                target,
                rate,
            } => write!(
                f,
                "state {state}: rate {rate} to state {target} is not positive"
            ),
            DiagnosticKind::PreemptedRates { state } => write!(
                f,
                "state {state}: Markovian transitions are pre-empted by tau (maximal progress)"
            ),
            DiagnosticKind::Deadlock { state } => write!(
                f,
                "state {state} has no transitions; treated as absorbing (rate-1 self-loop)"
            ),
            DiagnosticKind::Zeno { states } => {
                write!(f, "Zeno end component of probabilistic states {states:?}")
            }
        }
    }
}

impl Diagnostic {
    fn new(severity: Severity, kind: DiagnosticKind) -> Self {
        Diagnostic { severity, kind }
    }
}

/// Collects every invariant violation of `ma`. An empty list means the model
/// is well-formed; notices do not affect usability.
pub fn validate(ma: &MarkovAutomaton) -> Vec<Diagnostic> {
    use DiagnosticKind as K;
    use Severity::*;

    let n = ma.num_states();
    let mut out = Vec::new();
    if ma.initial >= n {
        out.push(Diagnostic::new(Error, K::InitialOutOfRange { initial: ma.initial }));
    }
    for (label, states) in &ma.labels {
        for &s in states.iter().filter(|&&s| s >= n) {
            out.push(Diagnostic::new(
                Error,
                K::DanglingLabel {
                    label: label.clone(),
                    state: s,
                },
            ));
        }
    }
    for s in 0..n {
        for (i, t) in ma.prob[s].iter().enumerate() {
            let entries = t.distribution.entries();
            if entries.is_empty() {
                out.push(Diagnostic::new(
                    Error,
                    K::EmptyDistribution {
                        state: s,
                        transition: i,
                    },
                ));
                continue;
            }
            let mut seen = BTreeSet::new();
            for &(target, prob) in entries {
                if target >= n {
                    out.push(Diagnostic::new(Error, K::DanglingTarget { state: s, target }));
                }
                if !seen.insert(target) {
                    out.push(Diagnostic::new(
                        Error,
                        K::DuplicateTarget {
                            state: s,
                            transition: i,
                            target,
                        },
                    ));
                }
                if !(prob.is_finite() && prob > 0.0 && prob <= 1.0 + PROB_SUM_TOLERANCE) {
                    out.push(Diagnostic::new(
                        Error,
                        K::InvalidProbability {
                            state: s,
                            transition: i,
                            target,
                            prob,
                        },
                    ));
                }
            }
            let sum = t.distribution.sum();
            if !((sum - 1.0).abs() <= PROB_SUM_TOLERANCE) {
                out.push(Diagnostic::new(
                    Error,
                    K::Unnormalized {
                        state: s,
                        transition: i,
                        sum,
                    },
                ));
            }
        }
        for e in &ma.markov[s] {
            if e.target >= n {
                out.push(Diagnostic::new(
                    Error,
                    K::DanglingTarget {
                        state: s,
                        target: e.target,
                    },
                ));
            }
            if !(e.rate.is_finite() && e.rate > 0.0) {
                out.push(Diagnostic::new(
                    Error,
                    K::NonPositiveRate {
                        state: s,
                        target: e.target,
                        rate: e.rate,
                    },
                ));
            }
        }
        if ma.has_tau(s) && !ma.markov[s].is_empty() {
            out.push(Diagnostic::new(Notice, K::PreemptedRates { state: s }));
        }
        if ma.prob[s].is_empty() && ma.markov[s].is_empty() {
            out.push(Diagnostic::new(Notice, K::Deadlock { state: s }));
        }
    }
    // Zeno analysis only makes sense on a structurally sound model.
    if out.iter().all(|d| d.severity != Error) {
        let zeno = graph::zeno_check(ma);
        if !zeno.is_empty() {
            out.push(Diagnostic::new(
                Warning,
                K::Zeno {
                    states: zeno.into_iter().collect(),
                },
            ));
        }
    }
    out
}

/// True when `diagnostics` contains nothing above notice level.
pub fn is_clean(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().all(|d| d.severity == Severity::Notice)
}
