//! Dense bounded-variable simplex and depth-first branch-and-bound.
//!
//! The LP engine keeps a full tableau `B^-1 [A | I]`, handles variable bounds
//! implicitly (nonbasic variables sit at a bound), and runs a two-phase primal
//! simplex from scratch or a dual simplex after bounds are tightened. Pricing is
//! Dantzig's rule, switching to Bland's rule whenever a run of degenerate pivots
//! is detected, which keeps the method cycle-free.
//!
//! ```
//! use shmnet_lp::{MilpModel, Relation, Sense, Status, solve_lp};
//!
//! let mut m = MilpModel::with_sense(Sense::Minimize);
//! let x = m.add_continuous("x", 0.0, 10.0, 1.0);
//! m.add_constraint("lb", [(x, 1.0)], Relation::Ge, 5.0);
//! let sol = solve_lp(&m);
//! assert_eq!(sol.status, Status::Optimal);
//! assert!((sol.objective_value - 5.0).abs() < 1e-9);
//! ```

mod branch;
pub mod lpformat;
mod model;
#[cfg(feature = "oracle")]
pub mod oracle;
mod simplex;
pub mod tol;

use thiserror::Error;

pub use branch::{solve_milp, solve_milp_with, MilpOptions};
pub use model::{
    Constraint, LpSolution, MilpModel, MilpSolution, Relation, Sense, Status, VarId, VarKind,
};
pub use simplex::solve_lp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("variable {var} has empty bounds [{lower}, {upper}]")]
    EmptyBounds { var: usize, lower: f64, upper: f64 },
    #[error("non-finite data in `{0}`")]
    NonFinite(String),
    #[error("constraint `{constraint}` references unknown variable {var}")]
    UnknownVariable { constraint: String, var: usize },
    #[error("integer variable `{0}` needs finite bounds")]
    UnboundedInteger(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    /// The time budget ran out; `best` holds the incumbent found so far.
    #[error("time budget exceeded after {nodes} nodes")]
    TimeBudgetExceeded {
        best: Option<Box<MilpSolution>>,
        nodes: usize,
    },
    #[error("simplex failed to converge")]
    Numerical,
}
