//! Numerical tolerances shared by the LP and MILP solvers.

/// Constraint feasibility tolerance.
pub const FEASIBILITY: f64 = 1e-7;
/// Distance from an integer below which a value counts as integral.
pub const INTEGRALITY: f64 = 1e-6;
/// Objective comparison tolerance.
pub const OBJECTIVE: f64 = 1e-6;
/// Bound tolerance for variable values.
pub const BOUND: f64 = 1e-9;

/// Reduced-cost tolerance used by pricing.
pub(crate) const OPTIMALITY: f64 = 1e-9;
/// Smallest pivot magnitude accepted by the ratio tests.
pub(crate) const PIVOT: f64 = 1e-9;
/// Entries smaller than this are flushed to zero after a pivot.
pub(crate) const DROP: f64 = 1e-12;
