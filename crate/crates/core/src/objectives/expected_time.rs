//! Minimal and maximal expected time to reach a goal set.

use std::time::Instant;

use super::{check_goal, policy_labels, prepare, reject_zeno, transitions, Engine};
use crate::graph::{prob1_exists, prob1_forall};
use crate::matrix::{ChoiceMatrix, MdpView};
use crate::model::{GoalSet, MarkovAutomaton};
use crate::result::{AnalysisResult, Objective};
use crate::solvers::{ssp_lp, ssp_value_iteration, Direction, SspInstance, DEFAULT_TOL};
use crate::Result;

#[derive(Clone, Debug)]
pub struct ExpectedTimeQuery {
    pub goal: GoalSet,
    pub direction: Direction,
    pub engine: Engine,
    pub tol: f64,
}

impl ExpectedTimeQuery {
    pub fn new(goal: GoalSet, direction: Direction) -> Self {
        ExpectedTimeQuery {
            goal,
            direction,
            engine: Engine::ValueIteration,
            tol: DEFAULT_TOL,
        }
    }
}

/// The SSP whose optimal cost is the expected time, restricted to the
/// states with finite value.
pub struct ExpectedTimeSsp {
    pub ssp: SspInstance,
    pub view: MdpView,
    /// States with finite optimal expected time.
    pub finite: Vec<bool>,
    /// For each SSP choice, the choice of `view` it came from.
    pub choice_origin: Vec<usize>,
}

/// Makes the goal absorbing, classifies the infinite states and builds the
/// SSP with cost `1/E(s)` on Markovian non-goal states.
pub fn expected_time_ssp(prepared: &MarkovAutomaton, goal: &GoalSet, dir: Direction) -> ExpectedTimeSsp {
    let absorbing = prepared.make_absorbing(goal);
    let view = MdpView::new(&absorbing);
    let n = absorbing.num_states();
    let goal_mask = goal.mask(n);
    let finite = match dir {
        Direction::Min => prob1_exists(&view.matrix, &goal_mask),
        Direction::Max => prob1_forall(&view.matrix, &goal_mask),
    };

    let mut b = ChoiceMatrix::builder();
    let mut costs = Vec::new();
    let mut choice_origin = Vec::new();
    for s in 0..n {
        if finite[s] && !goal_mask[s] {
            let cost = view.exit_rates[s].map_or(0.0, |e| 1.0 / e);
            for c in view.matrix.choices(s) {
                // A choice that may leave the finite region has infinite value.
                if view.matrix.targets(c).iter().all(|&t| finite[t]) {
                    b.push_choice(view.matrix.entries(c));
                    costs.push(cost);
                    choice_origin.push(c);
                }
            }
        }
        b.finish_state();
    }
    let ssp = SspInstance {
        matrix: b.build(),
        costs,
        goal: (0..n).map(|s| goal_mask[s] || !finite[s]).collect(),
        terminal: vec![0.0; n],
    };
    ExpectedTimeSsp {
        ssp,
        view,
        finite,
        choice_origin,
    }
}

pub fn expected_time(ma: &MarkovAutomaton, q: &ExpectedTimeQuery) -> Result<AnalysisResult> {
    let start = Instant::now();
    check_goal(ma, &q.goal)?;
    let prepared = prepare(ma);
    let built = expected_time_ssp(&prepared.ma, &q.goal, q.direction);
    let goal_mask = q.goal.mask(ma.num_states());
    let region: Vec<bool> = (0..ma.num_states())
        .map(|s| built.finite[s] && !goal_mask[s])
        .collect();
    reject_zeno(&prepared.ma.make_absorbing(&q.goal), &region)?;

    let solved = match q.engine {
        Engine::ValueIteration => ssp_value_iteration(&built.ssp, q.direction, q.tol)?,
        Engine::LinearProgram => ssp_lp(&built.ssp, q.direction)?,
    };
    let values: Vec<f64> = solved
        .values
        .iter()
        .zip(&built.finite)
        .map(|(&v, &fin)| if fin { v } else { f64::INFINITY })
        .collect();
    let policy: Vec<Option<usize>> = solved
        .policy
        .iter()
        .map(|c| c.map(|c| built.choice_origin[c]))
        .collect();

    Ok(AnalysisResult {
        objective: Objective::ExpectedTime,
        direction: q.direction,
        value: values[ma.initial()],
        policy: Some(policy_labels(ma, &built.view, &policy)),
        values,
        error_bound: None,
        epsilon: None,
        tol: (q.engine == Engine::ValueIteration).then_some(q.tol),
        time_s: start.elapsed().as_secs_f64(),
        states: ma.num_states(),
        goal_states: q.goal.len(),
        transitions: transitions(ma),
        notices: prepared.notices,
    })
}
