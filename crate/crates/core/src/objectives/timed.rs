//! Time-bounded and unbounded reachability.
//!
//! Timed reachability digitises the model: within a step of length `delta`
//! a Markovian state either stays put or takes exactly one Markovian jump,
//! followed by any number of instantaneous probabilistic moves. The value
//! after `k_b = b / delta` steps under-approximates the true probability by
//! at most `1 - e^{-lambda b} (1 + lambda delta)^{k_b}`.

use std::str::FromStr;
use std::time::Instant;

use num_rational::Ratio;

use super::{check_goal, policy_labels, prepare, reject_zeno, transitions};
use crate::graph::{can_reach, prob0_exists, prob1_exists, prob1_forall};
use crate::matrix::{ChoiceMatrix, MdpView};
use crate::model::{GoalSet, MarkovAutomaton};
use crate::result::{AnalysisResult, Objective};
use crate::solvers::{mdp_reach, Direction, ReachOrder, DEFAULT_TOL};
use crate::{Error, Result};

/// Largest admissible number of digitisation steps.
pub const MAX_STEPS: u64 = 100_000_000;

/// A time interval `[a, b]` with exact rational endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub a: Ratio<i64>,
    pub b: Ratio<i64>,
}

/// Parses a decimal literal (`2`, `0.25`, `1.5e-1`) into an exact fraction.
pub fn parse_decimal(text: &str) -> Result<Ratio<i64>> {
    let bad = || Error::InvalidQuery(format!("`{text}` is not a decimal number"));
    let t = text.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], i32::from_str(&t[i + 1..]).map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty()
        || !int.bytes().chain(frac.bytes()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let mut numer = i64::from_str(&digits).map_err(|_| bad())?;
    let mut scale = exp - frac.len() as i32;
    let mut denom: i64 = 1;
    while scale > 0 {
        numer = numer.checked_mul(10).ok_or_else(bad)?;
        scale -= 1;
    }
    while scale < 0 {
        denom = denom.checked_mul(10).ok_or_else(bad)?;
        scale += 1;
    }
    if neg {
        numer = -numer;
    }
    Ok(Ratio::new(numer, denom))
}

impl Interval {
    pub fn new(a: Ratio<i64>, b: Ratio<i64>) -> Result<Self> {
        if a < Ratio::from_integer(0) || b <= Ratio::from_integer(0) || a > b {
            return Err(Error::InvalidQuery(format!(
                "interval [{a}, {b}] must satisfy 0 <= a <= b and b > 0"
            )));
        }
        Ok(Interval { a, b })
    }

    /// `[0, b]`.
    pub fn upto(b: Ratio<i64>) -> Result<Self> {
        Interval::new(Ratio::from_integer(0), b)
    }

    pub fn parse(a: &str, b: &str) -> Result<Self> {
        Interval::new(parse_decimal(a)?, parse_decimal(b)?)
    }

    fn to_f64(r: Ratio<i64>) -> f64 {
        *r.numer() as f64 / *r.denom() as f64
    }

    pub fn a_f64(&self) -> f64 {
        Interval::to_f64(self.a)
    }

    pub fn b_f64(&self) -> f64 {
        Interval::to_f64(self.b)
    }
}

#[derive(Clone, Debug)]
pub struct TimedQuery {
    pub goal: GoalSet,
    pub direction: Direction,
    pub interval: Interval,
    pub epsilon: f64,
}

/// Step size and step counts of a digitisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Digitisation {
    pub delta: f64,
    pub k_a: u64,
    pub k_b: u64,
    pub lambda: f64,
    /// `1 - e^{-lambda b} (1 + lambda delta)^{k_b}`.
    pub error_bound: f64,
}

/// `1 - e^{-lambda b} (1 + lambda b / k)^k`, evaluated without cancellation.
pub fn digitisation_error(lambda: f64, b: f64, k: u64) -> f64 {
    let x = lambda * b;
    if x == 0.0 {
        return 0.0;
    }
    let k = k as f64;
    -f64::exp_m1(-x + k * f64::ln_1p(x / k))
}

/// Smallest step count whose error bound is at most `epsilon`, rounded up
/// so that `a` is also a whole number of steps.
pub fn choose_delta(lambda: f64, a: Ratio<i64>, b: Ratio<i64>, epsilon: f64) -> Result<Digitisation> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidQuery(format!("epsilon {epsilon} not in (0, 1)")));
    }
    let interval = Interval::new(a, b)?;
    let bf = interval.b_f64();
    let err = |k: u64| digitisation_error(lambda, bf, k);

    let seed = ((lambda * bf).powi(2) / (2.0 * epsilon)).ceil().max(1.0);
    if seed > MAX_STEPS as f64 * 4.0 {
        return Err(Error::Resource(format!(
            "about {seed:.0} digitisation steps needed for epsilon {epsilon}"
        )));
    }
    let seed = seed as u64;
    // The bound decreases in k. Bracket the minimum around the seed, then
    // bisect.
    let (mut lo, mut hi) = if err(seed) <= epsilon {
        let mut lo = seed;
        while lo > 1 && err(lo) <= epsilon {
            lo /= 2;
        }
        (lo, seed)
    } else {
        let mut hi = seed;
        while err(hi) > epsilon {
            hi = hi.checked_mul(2).filter(|&h| h <= 4 * MAX_STEPS).ok_or_else(|| {
                Error::Resource(format!("epsilon {epsilon} needs over {MAX_STEPS} steps"))
            })?;
        }
        (hi / 2, hi)
    };
    if err(lo) <= epsilon {
        hi = lo;
    }
    // Invariant: err(hi) <= epsilon < err(lo) unless hi == lo.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if err(mid) <= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut k_b = hi;

    // k_a = k_b * a / b must be integral.
    let ratio = a / b;
    let q = *ratio.denom() as u64;
    k_b = k_b.div_ceil(q) * q;
    if k_b > MAX_STEPS {
        return Err(Error::Resource(format!(
            "{k_b} digitisation steps exceed the cap of {MAX_STEPS}"
        )));
    }
    let k_a = k_b / q * (*ratio.numer() as u64);
    Ok(Digitisation {
        delta: bf / k_b as f64,
        k_a,
        k_b,
        lambda,
        error_bound: err(k_b),
    })
}

/// A digitised model: Markovian states carry a single one-step kernel,
/// probabilistic states keep their choices.
#[derive(Clone, Debug)]
pub struct DigitisedModel {
    pub matrix: ChoiceMatrix,
    pub markovian: Vec<bool>,
    pub delta: f64,
}

/// The kernel of Markovian `s` is `(1 - e^{-E(s) delta}) P(s, .)` plus
/// `e^{-E(s) delta}` on `s` itself. Requires a closed model.
pub fn build_dma(ma: &MarkovAutomaton, delta: f64) -> DigitisedModel {
    let view = MdpView::new(ma);
    let mut b = ChoiceMatrix::builder();
    for s in 0..ma.num_states() {
        match view.exit_rates[s] {
            Some(e) => {
                let stay = (-e * delta).exp();
                let leave = -(-e * delta).exp_m1();
                let mut row: Vec<(usize, f64)> = view
                    .matrix
                    .entries(view.matrix.choices(s).start)
                    .map(|(t, p)| (t, leave * p))
                    .collect();
                match row.iter_mut().find(|(t, _)| *t == s) {
                    Some(entry) => entry.1 += stay,
                    None => {
                        let at = row.partition_point(|(t, _)| *t < s);
                        row.insert(at, (s, stay));
                    }
                }
                b.push_choice(row);
            }
            None => {
                for c in view.matrix.choices(s) {
                    b.push_choice(view.matrix.entries(c));
                }
            }
        }
        b.finish_state();
    }
    DigitisedModel {
        matrix: b.build(),
        markovian: view.exit_rates.iter().map(Option::is_some).collect(),
        delta,
    }
}

/// Step-by-step value iteration on a digitised model. Starts with the goal
/// absorbing; [`DigitisedReach::release_goal`] switches to plain transient
/// propagation for the lower end of an interval.
pub struct DigitisedReach<'a> {
    dma: &'a DigitisedModel,
    goal: Vec<bool>,
    direction: Direction,
    tol: f64,
    absorbing: bool,
    markovian: Vec<usize>,
    order: ReachOrder,
    values: Vec<f64>,
    scratch: Vec<f64>,
    steps: u64,
}

impl<'a> DigitisedReach<'a> {
    pub fn new(dma: &'a DigitisedModel, goal: &[bool], direction: Direction, tol: f64) -> Self {
        let terminal: Vec<bool> = (0..goal.len())
            .map(|s| goal[s] || dma.markovian[s])
            .collect();
        let values: Vec<f64> = goal.iter().map(|&g| if g { 1.0 } else { 0.0 }).collect();
        let mut me = DigitisedReach {
            dma,
            goal: goal.to_vec(),
            direction,
            tol,
            absorbing: true,
            markovian: (0..goal.len()).filter(|&s| dma.markovian[s]).collect(),
            order: ReachOrder::new(&dma.matrix, &terminal),
            scratch: values.clone(),
            values,
            steps: 0,
        };
        me.probabilistic_phase();
        me
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// From now on goal states are ordinary states.
    pub fn release_goal(&mut self) {
        if self.absorbing {
            self.absorbing = false;
            self.order = ReachOrder::new(&self.dma.matrix, &self.dma.markovian);
        }
    }

    fn probabilistic_phase(&mut self) {
        self.order
            .solve(&self.dma.matrix, &mut self.values, self.direction, self.tol, None);
    }

    /// One Markovian step followed by the probabilistic closure.
    pub fn step(&mut self) {
        let m = &self.dma.matrix;
        for &s in &self.markovian {
            self.scratch[s] = if self.absorbing && self.goal[s] {
                1.0
            } else {
                m.dot(m.choices(s).start, &self.values)
            };
        }
        for &s in &self.markovian {
            self.values[s] = self.scratch[s];
        }
        self.probabilistic_phase();
        self.steps += 1;
    }
}

fn goal_mask_or_err(ma: &MarkovAutomaton, goal: &GoalSet) -> Result<Vec<bool>> {
    check_goal(ma, goal)?;
    Ok(goal.mask(ma.num_states()))
}

pub fn timed_reachability(ma: &MarkovAutomaton, q: &TimedQuery) -> Result<AnalysisResult> {
    let start = Instant::now();
    let goal = goal_mask_or_err(ma, &q.goal)?;
    let prepared = prepare(ma);
    let n = ma.num_states();
    reject_zeno(&prepared.ma, &vec![true; n])?;

    let view = MdpView::new(&prepared.ma);
    let has_lower = q.interval.a > Ratio::from_integer(0);
    let lambda = (0..n)
        .filter(|&s| has_lower || !goal[s])
        .filter_map(|s| view.exit_rates[s])
        .fold(0.0, f64::max);
    let dig = choose_delta(lambda, q.interval.a, q.interval.b, q.epsilon)?;
    let dma = build_dma(&prepared.ma, dig.delta);
    let tol = q.epsilon / (10.0 * dig.k_b as f64);

    let mut it = DigitisedReach::new(&dma, &goal, q.direction, tol);
    let mut previous = it.values().to_vec();
    for _ in 0..dig.k_b - dig.k_a {
        it.step();
        for (s, (&now, &before)) in it.values().iter().zip(&previous).enumerate() {
            assert!(
                now >= before - 1e-9 && (-1e-9..=1.0 + 1e-9).contains(&now),
                "digitised value of state {s} left its bounds: {before} -> {now}"
            );
        }
        previous.copy_from_slice(it.values());
    }
    if dig.k_a > 0 {
        it.release_goal();
        for _ in 0..dig.k_a {
            it.step();
        }
        assert!(it.values().iter().all(|v| (-1e-9..=1.0 + 1e-9).contains(v)));
    }
    let values: Vec<f64> = it.values().iter().map(|v| v.clamp(0.0, 1.0)).collect();

    let mut notices = prepared.notices;
    if q.direction == Direction::Min {
        notices.push("error bound for minimum probabilities uses the maximum-case bound".into());
    }
    Ok(AnalysisResult {
        objective: Objective::TimedReachability,
        direction: q.direction,
        value: values[ma.initial()],
        values,
        error_bound: Some(dig.error_bound),
        epsilon: Some(q.epsilon),
        tol: None,
        policy: None,
        time_s: start.elapsed().as_secs_f64(),
        states: n,
        goal_states: q.goal.len(),
        transitions: transitions(ma),
        notices,
    })
}

/// Optimal probability to eventually reach the goal. States with
/// probability 0 or 1 are found by graph analysis first.
pub fn unbounded_reachability(
    ma: &MarkovAutomaton,
    goal: &GoalSet,
    direction: Direction,
) -> Result<AnalysisResult> {
    let start = Instant::now();
    let goal_mask = goal_mask_or_err(ma, goal)?;
    let prepared = prepare(ma);
    let view = MdpView::new(&prepared.ma);
    let m = &view.matrix;
    let n = ma.num_states();
    let (zero, one) = match direction {
        Direction::Max => (
            can_reach(m, &goal_mask).iter().map(|r| !r).collect::<Vec<_>>(),
            prob1_exists(m, &goal_mask),
        ),
        Direction::Min => (prob0_exists(m, &goal_mask), prob1_forall(m, &goal_mask)),
    };
    let terminal: Vec<bool> = (0..n).map(|s| zero[s] || one[s] || goal_mask[s]).collect();
    let fixed: Vec<f64> = (0..n)
        .map(|s| if one[s] || goal_mask[s] { 1.0 } else { 0.0 })
        .collect();
    let solved = mdp_reach(m, &terminal, &fixed, direction, DEFAULT_TOL * 1e-2);
    let values: Vec<f64> = solved.values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(AnalysisResult {
        objective: Objective::UnboundedReachability,
        direction,
        value: values[ma.initial()],
        values,
        error_bound: None,
        epsilon: None,
        tol: Some(DEFAULT_TOL * 1e-2),
        policy: Some(policy_labels(ma, &view, &solved.policy)),
        time_s: start.elapsed().as_secs_f64(),
        states: n,
        goal_states: goal.len(),
        transitions: transitions(ma),
        notices: prepared.notices,
    })
}
