//! Analysis results and their text and JSON renderings.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::model::MarkovAutomaton;
use crate::solvers::Direction;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    ExpectedTime,
    LongRunAverage,
    TimedReachability,
    UnboundedReachability,
}

impl Objective {
    pub fn code(self) -> &'static str {
        match self {
            Objective::ExpectedTime => "et",
            Objective::LongRunAverage => "lra",
            Objective::TimedReachability => "tbr",
            Objective::UnboundedReachability => "ur",
        }
    }

    /// Parses CLI names such as `et-min` or `tbr-max`.
    pub fn parse_cli(name: &str) -> Option<(Objective, Direction)> {
        let (obj, dir) = name.rsplit_once('-')?;
        let objective = match obj {
            "et" => Objective::ExpectedTime,
            "lra" => Objective::LongRunAverage,
            "tbr" => Objective::TimedReachability,
            "ur" => Objective::UnboundedReachability,
            _ => return None,
        };
        let direction = match dir {
            "min" => Direction::Min,
            "max" => Direction::Max,
            _ => return None,
        };
        Some((objective, direction))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisResult {
    pub objective: Objective,
    pub direction: Direction,
    /// Value at the initial state; `f64::INFINITY` for infinite expected time.
    pub value: f64,
    /// Value per state of the analysed model.
    pub values: Vec<f64>,
    /// Certified additive error (timed reachability).
    pub error_bound: Option<f64>,
    pub epsilon: Option<f64>,
    /// Stopping tolerance of the iterative solver, if one was used.
    pub tol: Option<f64>,
    /// Chosen action per state for stationary objectives.
    pub policy: Option<Vec<Option<String>>>,
    pub time_s: f64,
    pub states: usize,
    pub goal_states: usize,
    pub transitions: usize,
    /// Non-fatal remarks, e.g. completed deadlocks.
    pub notices: Vec<String>,
}

fn number(x: f64) -> Value {
    if x.is_infinite() && x > 0.0 {
        Value::String("inf".into())
    } else {
        json!(x)
    }
}

impl AnalysisResult {
    pub fn name(&self) -> String {
        format!("{}-{}", self.objective.code(), self.direction)
    }

    /// The machine-readable summary, keys sorted.
    pub fn to_json(&self) -> String {
        let mut map = serde_json::Map::new();
        map.insert("objective".into(), json!(self.name()));
        map.insert("direction".into(), json!(self.direction.as_str()));
        map.insert("value".into(), number(self.value));
        map.insert(
            "error_bound".into(),
            self.error_bound.map_or(Value::Null, number),
        );
        map.insert("epsilon".into(), self.epsilon.map_or(Value::Null, number));
        map.insert("states".into(), json!(self.states));
        map.insert("goal_states".into(), json!(self.goal_states));
        map.insert("time_s".into(), json!(self.time_s));
        Value::Object(map).to_string()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let value = if self.value.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.6}", self.value)
        };
        let _ = writeln!(out, "objective:   {}", self.name());
        let _ = writeln!(out, "value:       {value}");
        if let Some(b) = self.error_bound {
            let _ = writeln!(out, "bracket:     [{:.6}, {:.6}]", self.value, self.value + b);
            let _ = writeln!(out, "error bound: {b:.3e}");
        }
        if let Some(e) = self.epsilon {
            let _ = writeln!(out, "epsilon:     {e:e}");
        }
        if let Some(t) = self.tol {
            let _ = writeln!(out, "tolerance:   {t:e}");
        }
        let _ = writeln!(
            out,
            "model:       {} states, {} goal states, {} transitions",
            self.states, self.goal_states, self.transitions
        );
        for n in &self.notices {
            let _ = writeln!(out, "notice:      {n}");
        }
        let _ = writeln!(out, "time:        {:.3}s", self.time_s);
        out
    }

    /// Two-column `state action` listing of the policy, if any.
    pub fn policy_text(&self, ma: &MarkovAutomaton) -> Option<String> {
        let policy = self.policy.as_ref()?;
        let mut out = String::new();
        for (s, a) in policy.iter().enumerate() {
            if let Some(a) = a {
                let _ = writeln!(out, "{} {}", ma.state_name(s), a);
            }
        }
        Some(out)
    }
}
