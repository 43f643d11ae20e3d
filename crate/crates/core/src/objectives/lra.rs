//! Minimal and maximal long-run average fraction of time spent in a goal
//! set.
//!
//! Each maximal end component is solved as a unichain long-run ratio
//! problem; the components are then collapsed into a decision state `u_j`
//! and a commit state `q_j` whose terminal reward is the component's value,
//! and the resulting SSP is solved for the best component to settle in.

use std::collections::BTreeMap;
use std::time::Instant;

use super::{check_goal, choice_label, prepare, reject_zeno, transitions, Engine};
use crate::graph::{mec_decompose_view, MaxEndComponent};
use crate::matrix::{ChoiceMatrix, ChoiceOrigin, MdpView};
use crate::model::{GoalSet, MarkovAutomaton};
use crate::result::{AnalysisResult, Objective};
use crate::solvers::{
    longrun_ratio_min, ssp_lp, ssp_value_iteration, Direction, RatioInstance, RatioSolution,
    SspInstance, DEFAULT_TOL,
};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct LraQuery {
    pub goal: GoalSet,
    pub direction: Direction,
    pub engine: Engine,
    pub tol: f64,
}

impl LraQuery {
    pub fn new(goal: GoalSet, direction: Direction) -> Self {
        LraQuery {
            goal,
            direction,
            engine: Engine::ValueIteration,
            tol: DEFAULT_TOL,
        }
    }
}

/// Choices of `view` retained by `mec`, per member state.
fn mec_choices(view: &MdpView, mec: &MaxEndComponent) -> Vec<(usize, Vec<usize>)> {
    mec.states
        .iter()
        .map(|&s| {
            let range = view.matrix.choices(s);
            let kept = mec.actions[&s]
                .iter()
                .map(|o| match o {
                    ChoiceOrigin::Markovian => range.start,
                    ChoiceOrigin::Transition(i) => range.start + i,
                })
                .collect();
            (s, kept)
        })
        .collect()
}

/// The two-cost MDP of one end component: `c1 = 1/E(s)` on Markovian goal
/// states, `c2 = 1/E(s)` on every Markovian state, states renumbered in
/// ascending order.
fn two_cost_mdp(view: &MdpView, mec: &MaxEndComponent, goal: &[bool]) -> RatioInstance {
    let local: BTreeMap<usize, usize> = mec.states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut b = ChoiceMatrix::builder();
    let (mut c1, mut c2) = (Vec::new(), Vec::new());
    for (s, kept) in mec_choices(view, mec) {
        for c in kept {
            b.push_choice(view.matrix.entries(c).map(|(t, p)| (local[&t], p)));
            let residence = view.exit_rates[s].map_or(0.0, |e| 1.0 / e);
            c1.push(if goal[s] { residence } else { 0.0 });
            c2.push(residence);
        }
        b.finish_state();
    }
    RatioInstance {
        matrix: b.build(),
        c1,
        c2,
    }
}

/// Optimal long-run average time in `goal` within one end component of a
/// prepared model, together with the ratio program's solution (for `Max`,
/// the solution of the complementary minimisation).
pub fn lra_unichain_solution(
    view: &MdpView,
    mec: &MaxEndComponent,
    goal: &[bool],
    dir: Direction,
) -> Result<(f64, RatioInstance, RatioSolution)> {
    if !mec.states.iter().any(|&s| view.is_markovian(s)) {
        return Err(Error::Zeno(mec.states.iter().map(|s| format!("#{s}")).collect()));
    }
    let target: Vec<bool> = match dir {
        Direction::Min => (0..goal.len()).map(|s| goal[s] && view.is_markovian(s)).collect(),
        Direction::Max => (0..goal.len()).map(|s| !goal[s] && view.is_markovian(s)).collect(),
    };
    let inst = two_cost_mdp(view, mec, &target);
    let sol = longrun_ratio_min(&inst)?;
    let k = sol.k.clamp(0.0, 1.0);
    let value = match dir {
        Direction::Min => k,
        Direction::Max => 1.0 - k,
    };
    Ok((value, inst, sol))
}

/// Long-run average time in `goal` of the end component `mec` of `ma`
/// (which must be closed, all-`tau` and deadlock free).
pub fn lra_unichain(
    ma: &MarkovAutomaton,
    mec: &MaxEndComponent,
    goal: &GoalSet,
    dir: Direction,
) -> Result<f64> {
    let view = MdpView::new(ma);
    let mask = goal.mask(ma.num_states());
    Ok(lra_unichain_solution(&view, mec, &mask, dir)?.0)
}

/// The SSP over non-component states, decision states `u_j` and commit
/// states `q_j`.
#[derive(Clone, Debug)]
pub struct LraQuotient {
    pub ssp: SspInstance,
    pub names: Vec<String>,
    /// Label per SSP choice: `!` for the timed step of a Markovian state and
    /// for the commit and stay moves, the action name otherwise.
    pub labels: Vec<String>,
    /// Original state -> quotient state (`u_j` for members of component j).
    pub state_map: Vec<usize>,
    pub decision: Vec<usize>,
    pub commit: Vec<usize>,
    /// For each SSP choice leaving a component, the original state and the
    /// choice of the view it stems from.
    pub origin: Vec<Option<(usize, usize)>>,
}

/// Builds the quotient of `ma` for components `mecs` (of the prepared
/// model) with unichain values `mec_values`. Choice labels use the action
/// names of `ma`.
pub fn lra_quotient(
    ma: &MarkovAutomaton,
    mecs: &[MaxEndComponent],
    mec_values: &[f64],
) -> LraQuotient {
    let prepared = prepare(ma).ma;
    let view = MdpView::new(&prepared);
    build_quotient(ma, &prepared, &view, mecs, mec_values)
}

fn build_quotient(
    original: &MarkovAutomaton,
    prepared: &MarkovAutomaton,
    view: &MdpView,
    mecs: &[MaxEndComponent],
    mec_values: &[f64],
) -> LraQuotient {
    let n = prepared.num_states();
    let k = mecs.len();
    let mut member = vec![None; n];
    for (j, mec) in mecs.iter().enumerate() {
        for &s in &mec.states {
            member[s] = Some(j);
        }
    }
    let mut state_map = vec![0; n];
    let mut names = Vec::new();
    for s in 0..n {
        if member[s].is_none() {
            state_map[s] = names.len();
            names.push(prepared.state_name(s).to_string());
        }
    }
    let decision: Vec<usize> = (0..k).map(|j| names.len() + j).collect();
    let commit: Vec<usize> = (0..k).map(|j| names.len() + k + j).collect();
    for s in 0..n {
        if let Some(j) = member[s] {
            state_map[s] = decision[j];
        }
    }
    names.extend((1..=k).map(|j| format!("u{j}")));
    names.extend((1..=k).map(|j| format!("q{j}")));

    let mapped = |c: usize| -> Vec<(usize, f64)> {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (t, p) in view.matrix.entries(c) {
            *merged.entry(state_map[t]).or_insert(0.0) += p;
        }
        merged.into_iter().collect()
    };

    let mut b = ChoiceMatrix::builder();
    let mut labels = Vec::new();
    let mut origin = Vec::new();
    for s in (0..n).filter(|&s| member[s].is_none()) {
        for c in view.matrix.choices(s) {
            b.push_choice(mapped(c));
            labels.push(choice_label(original, view, c));
            origin.push(Some((s, c)));
        }
        b.finish_state();
    }
    for (j, mec) in mecs.iter().enumerate() {
        b.push_choice([(commit[j], 1.0)]);
        labels.push("!".to_string());
        origin.push(None);
        for (s, kept) in mec_choices(view, mec) {
            for c in view.matrix.choices(s).filter(|c| !kept.contains(c)) {
                b.push_choice(mapped(c));
                labels.push(choice_label(original, view, c));
                origin.push(Some((s, c)));
            }
        }
        b.finish_state();
    }
    for &q in &commit {
        b.push_choice([(q, 1.0)]);
        labels.push("!".to_string());
        origin.push(None);
        b.finish_state();
    }
    let matrix = b.build();
    let total = names.len();
    let mut goal = vec![false; total];
    let mut terminal = vec![0.0; total];
    for j in 0..k {
        goal[commit[j]] = true;
        terminal[commit[j]] = mec_values[j];
    }
    LraQuotient {
        ssp: SspInstance {
            costs: vec![0.0; matrix.num_choices()],
            matrix,
            goal,
            terminal,
        },
        names,
        labels,
        state_map,
        decision,
        commit,
        origin,
    }
}

pub fn lra(ma: &MarkovAutomaton, q: &LraQuery) -> Result<AnalysisResult> {
    let start = Instant::now();
    check_goal(ma, &q.goal)?;
    let mut prepared = prepare(ma);
    let n = ma.num_states();
    reject_zeno(&prepared.ma, &vec![true; n])?;
    let view = MdpView::new(&prepared.ma);
    let mask = q.goal.mask(n);
    let dropped = (0..n).filter(|&s| mask[s] && !view.is_markovian(s)).count();
    if dropped > 0 {
        prepared.notices.push(format!(
            "{dropped} probabilistic goal states ignored (no residence time)"
        ));
    }

    let mecs = mec_decompose_view(&view);
    let mut mec_values = Vec::with_capacity(mecs.len());
    let mut inner_policy: Vec<Option<usize>> = vec![None; n];
    for mec in &mecs {
        if !mec.states.iter().any(|&s| view.is_markovian(s)) {
            // Only possible off the reachable part, which the Zeno check
            // does not cover; the value never matters there.
            mec_values.push(0.0);
            continue;
        }
        let (value, inst, sol) = lra_unichain_solution(&view, mec, &mask, q.direction)?;
        mec_values.push(value);
        // Inside a component, pick for every probabilistic state the first
        // retained choice that is tight in the ratio program.
        let slack = inst.slacks(sol.k, &sol.x);
        let kept = mec_choices(&view, mec);
        let mut local = 0;
        for (s, choices) in kept {
            let mut pick = None;
            for &c in &choices {
                if pick.is_none() && slack[local] <= 1e-6 {
                    pick = Some(c);
                }
                local += 1;
            }
            inner_policy[s] = pick.or(choices.first().copied());
        }
    }

    let quotient = build_quotient(ma, &prepared.ma, &view, &mecs, &mec_values);
    let solved = match q.engine {
        Engine::ValueIteration => ssp_value_iteration(&quotient.ssp, q.direction, q.tol)?,
        Engine::LinearProgram => ssp_lp(&quotient.ssp, q.direction)?,
    };
    let values: Vec<f64> = (0..n)
        .map(|s| solved.values[quotient.state_map[s]].clamp(0.0, 1.0))
        .collect();

    let mut policy: Vec<Option<String>> = vec![None; n];
    for s in (0..n).filter(|&s| !view.is_markovian(s)) {
        if let Some(c) = inner_policy[s] {
            policy[s] = Some(choice_label(ma, &view, c));
        }
    }
    for (qs, c) in solved.policy.iter().enumerate() {
        if let Some(c) = c {
            if let Some((s, vc)) = quotient.origin[*c] {
                if !view.is_markovian(s) && (quotient.state_map[s] == qs) {
                    policy[s] = Some(choice_label(ma, &view, vc));
                }
            }
        }
    }

    Ok(AnalysisResult {
        objective: Objective::LongRunAverage,
        direction: q.direction,
        value: values[ma.initial()],
        values,
        error_bound: None,
        epsilon: None,
        tol: (q.engine == Engine::ValueIteration).then_some(q.tol),
        policy: Some(policy),
        time_s: start.elapsed().as_secs_f64(),
        states: n,
        goal_states: q.goal.len(),
        transitions: transitions(ma),
        notices: prepared.notices,
    })
}
