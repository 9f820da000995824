//! Depth-first branch-and-bound over LP relaxations.

use std::time::{Duration, Instant};

use crate::model::{MilpModel, MilpSolution, Sense, Status};
use crate::simplex::{Outcome, Simplex};
use crate::{tol, MilpError};

/// Knobs for [`solve_milp_with`].
#[derive(Debug, Clone, Default)]
pub struct MilpOptions {
    pub time_budget: Option<Duration>,
    pub node_limit: Option<usize>,
    /// A known feasible assignment used as the starting incumbent.
    pub incumbent: Option<Vec<f64>>,
}

struct Node {
    /// `(var, lower, upper)` overrides relative to the root model.
    bounds: Vec<(usize, f64, f64)>,
    /// Relaxation objective of the parent, in minimization form.
    parent_bound: f64,
    /// Parent tableau to warm-start from; only the last override is new to it.
    warm: Option<Box<Simplex>>,
}

struct Incumbent {
    objective: f64,
    values: Vec<f64>,
}

/// Solves `model` to optimality within `time_budget`.
///
/// Branches on the most fractional integral variable of the highest
/// priority (ties broken by lowest index), explores depth-first with the nearer rounding first, and prunes
/// nodes whose relaxation cannot beat the incumbent.
pub fn solve_milp(model: &MilpModel, time_budget: Duration) -> Result<MilpSolution, MilpError> {
    solve_milp_with(
        model,
        &MilpOptions {
            time_budget: Some(time_budget),
            ..MilpOptions::default()
        },
    )
}

pub fn solve_milp_with(model: &MilpModel, opts: &MilpOptions) -> Result<MilpSolution, MilpError> {
    model.validate_for_branching()?;
    let start = Instant::now();
    let sign = match model.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let n = model.num_vars();
    let integral: Vec<bool> = (0..n).map(|j| model.kind(j).is_integral()).collect();
    let step = objective_step(model, &integral);
    let dominated = |bound: f64, inc: &Option<Incumbent>| -> bool {
        match inc {
            None => false,
            Some(best) if step > 0.0 => bound > best.objective - step + tol::OBJECTIVE * (1.0 + best.objective.abs()),
            Some(best) => bound >= best.objective - tol::OBJECTIVE * (1.0 + best.objective.abs()),
        }
    };

    let mut root = Simplex::new(model);
    let root_outcome = root.solve();
    let empty = |status: Status, nodes: usize, root_bound: f64| MilpSolution {
        status,
        values: vec![0.0; n],
        objective_value: f64::NAN,
        nodes_explored: nodes,
        root_bound,
    };
    match root_outcome {
        Outcome::Optimal => {}
        Outcome::Infeasible => return Ok(empty(Status::Infeasible, 1, f64::NAN)),
        Outcome::Unbounded => return Ok(empty(Status::Unbounded, 1, f64::NAN)),
        Outcome::IterationLimit => return Err(MilpError::Numerical),
    }
    let root_bound = root.min_objective();

    let mut incumbent: Option<Incumbent> = opts
        .incumbent
        .as_ref()
        .filter(|v| model.is_feasible(v))
        .map(|v| Incumbent {
            objective: sign * model.objective_value(v),
            values: v.clone(),
        });

    let finish = |inc: Option<Incumbent>, nodes: usize| -> MilpSolution {
        match inc {
            Some(best) => MilpSolution {
                status: Status::Optimal,
                objective_value: model.objective_value(&best.values),
                values: best.values,
                nodes_explored: nodes,
                root_bound: sign * root_bound,
            },
            None => empty(Status::Infeasible, nodes, sign * root_bound),
        }
    };

    let mut stack = vec![Node {
        bounds: Vec::new(),
        parent_bound: root_bound,
        warm: None,
    }];
    let mut nodes = 0usize;
    while let Some(node) = stack.pop() {
        let out_of_time = opts.time_budget.is_some_and(|b| start.elapsed() > b);
        let out_of_nodes = opts.node_limit.is_some_and(|l| nodes >= l);
        if out_of_time || out_of_nodes {
            return Err(MilpError::TimeBudgetExceeded {
                best: incumbent.map(|inc| Box::new(finish(Some(inc), nodes))),
                nodes,
            });
        }
        if dominated(node.parent_bound, &incumbent) {
            continue;
        }
        nodes += 1;
        let mut lp = match node.warm {
            Some(parent) => {
                let mut lp = *parent;
                let &(j, lo, hi) = node.bounds.last().expect("warm node carries a bound");
                lp.set_bounds(j, lo, hi);
                lp
            }
            None if node.bounds.is_empty() => root.clone(),
            None => {
                let mut lp = root.clone();
                for &(j, lo, hi) in &node.bounds {
                    lp.set_bounds(j, lo, hi);
                }
                lp
            }
        };
        if !node.bounds.is_empty() {
            match lp.reoptimize() {
                Outcome::Optimal => {}
                Outcome::Infeasible => continue,
                // tightening bounds cannot unbound a bounded relaxation
                Outcome::Unbounded | Outcome::IterationLimit => return Err(MilpError::Numerical),
            }
        }
        let bound = lp.min_objective();
        if dominated(bound, &incumbent) {
            continue;
        }
        let values = lp.values();

        let mut branch: Option<(usize, i32, f64)> = None;
        for j in (0..n).filter(|&j| integral[j]) {
            let v = values[j];
            let dist = (v - v.floor()).min(v.ceil() - v);
            let prio = model.priority(j);
            if dist > tol::INTEGRALITY && branch.map_or(true, |(_, p, d)| (prio, dist) > (p, d)) {
                branch = Some((j, prio, dist));
            }
        }

        match branch {
            None => {
                let snapped: Vec<f64> = values
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| if integral[j] { v.round() } else { v })
                    .collect();
                let candidate = if model.max_violation(&snapped) <= tol::FEASIBILITY * 10.0 {
                    snapped
                } else {
                    values
                };
                let objective = sign * model.objective_value(&candidate);
                let improves = incumbent
                    .as_ref()
                    .map_or(true, |best| objective < best.objective - tol::OBJECTIVE * (1.0 + best.objective.abs()));
                if improves {
                    incumbent = Some(Incumbent {
                        objective,
                        values: candidate,
                    });
                }
            }
            Some((j, _, _)) => {
                let v = values[j];
                let (lo, hi) = (lp.lower(j), lp.upper(j));
                let down = with_bound(&node.bounds, j, lo, v.floor());
                let up = with_bound(&node.bounds, j, v.ceil(), hi);
                let up_first = v - v.floor() >= 0.5;
                let (second, first) = if up_first { (down, up) } else { (up, down) };
                stack.push(Node {
                    bounds: second,
                    parent_bound: bound,
                    warm: None,
                });
                stack.push(Node {
                    bounds: first,
                    parent_bound: bound,
                    warm: Some(Box::new(lp)),
                });
            }
        }
    }

    let solution = finish(incumbent, nodes);
    debug_assert!(
        solution.status != Status::Optimal
            || sign * solution.objective_value
                >= root_bound - tol::OBJECTIVE * (1.0 + root_bound.abs()),
        "relaxation bound {root_bound} exceeds integer optimum {}",
        solution.objective_value
    );
    Ok(solution)
}

/// Spacing of attainable objective values: the gcd of the objective
/// coefficients when they are all integers on integral variables, else 0.
fn objective_step(model: &MilpModel, integral: &[bool]) -> f64 {
    let mut g: u64 = 0;
    for j in 0..model.num_vars() {
        let c = model.cost(j);
        if c == 0.0 {
            continue;
        }
        if !integral[j] || (c - c.round()).abs() > 1e-9 || c.abs() > 1e15 {
            return 0.0;
        }
        let mut a = c.round().abs() as u64;
        let mut b = g;
        while b != 0 {
            (a, b) = (b, a % b);
        }
        g = a;
    }
    g as f64
}

fn with_bound(bounds: &[(usize, f64, f64)], j: usize, lo: f64, hi: f64) -> Vec<(usize, f64, f64)> {
    let mut out: Vec<_> = bounds.iter().copied().filter(|&(k, _, _)| k != j).collect();
    out.push((j, lo, hi));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Relation, VarKind};

    #[test]
    fn binary_knapsack() {
        let mut m = MilpModel::with_sense(Sense::Maximize);
        let a = m.add_binary("a", 3.0);
        let b = m.add_binary("b", 2.0);
        m.add_constraint("cap", [(a, 1.0), (b, 1.0)], Relation::Le, 1.0);
        let s = solve_milp(&m, Duration::from_secs(5)).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.int_value(a), 1);
        assert_eq!(s.int_value(b), 0);
        assert_eq!(s.objective_value, 3.0);
    }

    #[test]
    fn contradictory_binary_is_infeasible() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x", 1.0);
        m.add_constraint("ge", [(x, 1.0)], Relation::Ge, 1.0);
        m.add_constraint("le", [(x, 1.0)], Relation::Le, 0.0);
        let s = solve_milp(&m, Duration::from_secs(5)).unwrap();
        assert_eq!(s.status, Status::Infeasible);
    }

    #[test]
    fn general_integer_needs_branching() {
        // max x + y, 2x + 2y <= 7, x,y in 0..=5 integer → 3
        let mut m = MilpModel::with_sense(Sense::Maximize);
        let x = m.add_var("x", VarKind::Integer, 0.0, 5.0, 1.0);
        let y = m.add_var("y", VarKind::Integer, 0.0, 5.0, 1.0);
        m.add_constraint("c", [(x, 2.0), (y, 2.0)], Relation::Le, 7.0);
        let s = solve_milp(&m, Duration::from_secs(5)).unwrap();
        assert_eq!(s.objective_value, 3.0);
        assert!(s.root_bound >= 3.5 - 1e-9);
    }

    #[test]
    fn node_limit_reports_incumbent() {
        let mut m = MilpModel::with_sense(Sense::Maximize);
        let vars: Vec<_> = (0..12).map(|i| m.add_binary(format!("v{i}"), 1.0 + i as f64 * 0.37)).collect();
        m.add_constraint(
            "w",
            vars.iter().enumerate().map(|(i, &v)| (v, 1.0 + (i % 5) as f64 * 0.9)),
            Relation::Le,
            9.3,
        );
        let err = solve_milp_with(
            &m,
            &MilpOptions {
                node_limit: Some(2),
                ..MilpOptions::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, MilpError::TimeBudgetExceeded { nodes: 2, .. }));
    }

    #[test]
    fn objective_step_is_the_coefficient_gcd() {
        let mut m = MilpModel::new();
        let a = m.add_binary("a", 96.0);
        m.add_binary("b", -64.0);
        m.add_binary("c", 0.0);
        let integral = [true, true, true];
        assert_eq!(objective_step(&m, &integral), 32.0);
        m.set_cost(a, 1.5);
        assert_eq!(objective_step(&m, &integral), 0.0);
        let mut m = MilpModel::new();
        m.add_continuous("x", 0.0, 1.0, 2.0);
        assert_eq!(objective_step(&m, &[false]), 0.0);
    }

    #[test]
    fn priorities_do_not_change_the_optimum() {
        let mut m = MilpModel::with_sense(Sense::Maximize);
        let vars: Vec<_> = (0..8).map(|i| m.add_binary(format!("v{i}"), 1.0 + (i * 7 % 5) as f64)).collect();
        m.add_constraint("w", vars.iter().map(|&v| (v, 1.0 + (v % 3) as f64 * 0.7)), Relation::Le, 5.5);
        let plain = solve_milp(&m, Duration::from_secs(5)).unwrap();
        for (i, &v) in vars.iter().enumerate() {
            m.set_priority(v, (i % 3) as i32);
        }
        let ranked = solve_milp(&m, Duration::from_secs(5)).unwrap();
        assert_eq!(plain.objective_value, ranked.objective_value);
    }

    #[test]
    fn unbounded_integer_is_rejected() {
        let mut m = MilpModel::new();
        m.add_var("z", VarKind::Integer, 0.0, f64::INFINITY, 1.0);
        assert!(matches!(
            solve_milp(&m, Duration::from_secs(1)),
            Err(MilpError::Model(_))
        ));
    }
}
