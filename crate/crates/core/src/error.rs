use std::path::PathBuf;

use shmnet_lp::MilpError;
use thiserror::Error;

use crate::netmodel::{NetError, NodeId};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// The solver ran out of time; `incumbent` is the objective of the best
    /// solution found, if any.
    #[error("time budget exceeded after {nodes} branch-and-bound nodes")]
    TimeBudgetExceeded { nodes: usize, incumbent: Option<f64> },
    #[error("LP rounding stalled with {attached} nodes attached")]
    Stalled { attached: usize },
    #[error("inconsistent solver output: {0}")]
    InconsistentSolution(String),
    #[error("node {0} cannot be attached under the capacity limits")]
    Unattachable(NodeId),
    #[error("solver failure: {0}")]
    Solver(MilpError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<MilpError> for Error {
    fn from(e: MilpError) -> Self {
        match e {
            MilpError::TimeBudgetExceeded { best, nodes } => Error::TimeBudgetExceeded {
                nodes,
                incumbent: best.map(|b| b.objective_value),
            },
            other => Error::Solver(other),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
