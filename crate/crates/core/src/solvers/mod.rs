//! Numeric kernels shared by the objective engines.

pub mod lp;
pub mod ratio;
pub mod reach;
pub mod ssp;

use std::fmt;

use thiserror::Error;

pub use lp::{simplex_solve, LpProblem, LpSolution, LpStatus, Relation, Sense, VarBound};
pub use ratio::{longrun_ratio_min, RatioInstance, RatioSolution};
pub use reach::{mdp_reach, ReachOrder};
pub use ssp::{bellman_residual, ssp_lp, ssp_value_iteration, SspInstance};

/// Default stopping tolerance of the iterative solvers.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Sweep cap of value iteration.
pub const VI_ITERATION_CAP: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Min => "min",
            Direction::Max => "max",
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Min => Direction::Max,
            Direction::Max => Direction::Min,
        }
    }

    /// Whether `candidate` strictly improves on `incumbent`.
    #[inline]
    pub fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Direction::Min => candidate < incumbent,
            Direction::Max => candidate > incumbent,
        }
    }

    /// The worst possible value, the neutral start of an optimisation.
    #[inline]
    pub fn worst(self) -> f64 {
        match self {
            Direction::Min => f64::INFINITY,
            Direction::Max => f64::NEG_INFINITY,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-state values with the metadata of the run that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueVector {
    pub values: Vec<f64>,
    pub direction: Direction,
    pub iterations: usize,
    /// Last max-norm update (value iteration) or 0 for exact solves.
    pub residual: f64,
    /// Optimal choice (global choice index) per state, `None` where no
    /// decision is made.
    pub policy: Vec<Option<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("value iteration did not converge after {iterations} sweeps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("linear program is {0}")]
    Lp(LpStatus),
    #[error("state {0} is not terminal but has no choice")]
    MissingChoice(usize),
}
