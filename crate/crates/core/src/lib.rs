//! Quantitative analysis of Markov automata.
//!
//! Models are built with [`model::MaBuilder`], read from the `.ma` text
//! format ([`io`]), imported from generalized stochastic Petri nets
//! ([`gspn`]) or generated ([`generators`]). The [`objectives`] compute
//! optimal expected time, long-run average and time-bounded reachability.

pub mod cli;
pub mod generators;
pub mod graph;
pub mod gspn;
pub mod io;
pub mod matrix;
pub mod model;
pub mod objectives;
pub mod result;
pub mod solvers;

use thiserror::Error;

pub use model::{Distribution, GoalSet, MaBuilder, MarkovAutomaton, StateClass};
pub use objectives::{
    expected_time, lra, timed_reachability, unbounded_reachability, Engine, ExpectedTimeQuery,
    Interval, LraQuery, TimedQuery,
};
pub use result::{AnalysisResult, Objective};
pub use solvers::Direction;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] io::ParseError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Gspn(#[from] gspn::GspnError),
    #[error(transparent)]
    Solver(#[from] solvers::SolverError),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("Zeno behaviour: probabilistic cycle through {}", .0.join(", "))]
    Zeno(Vec<String>),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the failure is about exhausted limits or numerics rather
    /// than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::Resource(_) | Error::Solver(_) | Error::Gspn(gspn::GspnError::StateLimit { .. })
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
