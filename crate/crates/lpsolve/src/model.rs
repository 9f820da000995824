//! Mixed-integer linear program model and solution types.

use std::fmt;

use crate::tol;
use crate::ModelError;

/// Index of a variable inside a [`MilpModel`].
pub type VarId = usize;

/// Integrality class of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

/// Relation between the left-hand side of a constraint and its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Ge => lhs >= rhs - tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        }
    }

    /// Amount by which `lhs rel rhs` is violated (zero when satisfied).
    pub fn violation(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::Le => (lhs - rhs).max(0.0),
            Relation::Ge => (rhs - lhs).max(0.0),
            Relation::Eq => (lhs - rhs).abs(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sense {
    #[default]
    Minimize,
    Maximize,
}

/// A single linear constraint stored as sparse `(variable, coefficient)` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Variable {
    name: String,
    kind: VarKind,
    lower: f64,
    upper: f64,
    cost: f64,
    priority: i32,
}

/// A linear program with optional integrality restrictions.
///
/// Variables carry their own bounds; constraints are stored sparsely and
/// duplicate terms are merged on insertion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MilpModel {
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
    sense: Sense,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_sense(sense: Sense) -> Self {
        Self {
            sense,
            ..Self::default()
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn set_sense(&mut self, sense: Sense) {
        self.sense = sense;
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
        cost: f64,
    ) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        self.vars.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
            cost,
            priority: 0,
        });
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0, cost)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lower, upper, cost)
    }

    pub fn add_constraint<I>(&mut self, name: impl Into<String>, terms: I, relation: Relation, rhs: f64)
    where
        I: IntoIterator<Item = (VarId, f64)>,
    {
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        for (j, a) in terms {
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(slot) => slot.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        merged.sort_by_key(|&(j, _)| j);
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merged,
            relation,
            rhs,
        });
    }

    pub fn set_cost(&mut self, var: VarId, cost: f64) {
        self.vars[var].cost = cost;
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        self.vars[var].lower = lower;
        self.vars[var].upper = upper;
    }

    /// Branch-and-bound branches on fractional variables of the highest
    /// priority first. Defaults to 0.
    pub fn set_priority(&mut self, var: VarId, priority: i32) {
        self.vars[var].priority = priority;
    }

    pub fn priority(&self, var: VarId) -> i32 {
        self.vars[var].priority
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn name(&self, var: VarId) -> &str {
        &self.vars[var].name
    }

    pub fn kind(&self, var: VarId) -> VarKind {
        self.vars[var].kind
    }

    pub fn lower(&self, var: VarId) -> f64 {
        self.vars[var].lower
    }

    pub fn upper(&self, var: VarId) -> f64 {
        self.vars[var].upper
    }

    pub fn cost(&self, var: VarId) -> f64 {
        self.vars[var].cost
    }

    pub fn costs(&self) -> Vec<f64> {
        self.vars.iter().map(|v| v.cost).collect()
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.cost * x).sum()
    }

    /// Largest violation of any constraint or bound at `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.relation.violation(c.lhs(values), c.rhs));
        let bounds = self
            .vars
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    /// True when `values` satisfies every constraint, bound and integrality flag.
    pub fn is_feasible(&self, values: &[f64]) -> bool {
        values.len() == self.vars.len()
            && self.max_violation(values) <= tol::FEASIBILITY
            && self
                .vars
                .iter()
                .zip(values)
                .all(|(v, &x)| !v.kind.is_integral() || (x - x.round()).abs() <= tol::INTEGRALITY)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (j, v) in self.vars.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || !v.cost.is_finite() {
                return Err(ModelError::NonFinite(v.name.clone()));
            }
            if v.lower > v.upper {
                return Err(ModelError::EmptyBounds {
                    var: j,
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() || c.terms.iter().any(|(_, a)| !a.is_finite()) {
                return Err(ModelError::NonFinite(c.name.clone()));
            }
            if let Some(&(j, _)) = c.terms.iter().find(|(j, _)| *j >= self.vars.len()) {
                return Err(ModelError::UnknownVariable {
                    constraint: c.name.clone(),
                    var: j,
                });
            }
        }
        Ok(())
    }

    /// Checks the preconditions of branch-and-bound: every integral variable
    /// must have finite bounds.
    pub fn validate_for_branching(&self) -> Result<(), ModelError> {
        self.validate()?;
        for v in &self.vars {
            if v.kind.is_integral() && !(v.lower.is_finite() && v.upper.is_finite()) {
                return Err(ModelError::UnboundedInteger(v.name.clone()));
            }
        }
        Ok(())
    }
}

/// Outcome class of an LP or MILP solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
        })
    }
}

/// Result of solving the continuous relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// `true` for variables that ended in the optimal basis.
    pub basic: Vec<bool>,
    pub iterations: usize,
}

/// Result of a branch-and-bound solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: Status,
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub nodes_explored: usize,
    /// Objective of the root relaxation.
    pub root_bound: f64,
}

impl MilpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Value of an integral variable rounded to the nearest integer.
    pub fn int_value(&self, var: VarId) -> i64 {
        self.values[var].round() as i64
    }

    pub fn is_set(&self, var: VarId) -> bool {
        self.values[var] > 0.5
    }
}
