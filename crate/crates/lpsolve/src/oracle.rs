//! Brute-force reference solvers and random instance generators.
//!
//! These share no code with the simplex: vertex enumeration solves every
//! square subsystem of active constraints by Gaussian elimination, and the
//! 0/1 oracle walks all assignments.

use rand::Rng;

use crate::model::{MilpModel, Relation, Sense, VarKind};

/// Best objective over all basic feasible solutions of a box-bounded LP, or
/// `None` when no vertex is feasible.
pub fn vertex_enumeration(model: &MilpModel) -> Option<f64> {
    let n = model.num_vars();
    assert!(
        (0..n).all(|j| model.lower(j).is_finite() && model.upper(j).is_finite()),
        "vertex enumeration needs finite bounds"
    );
    let mut planes: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    for c in model.constraints() {
        let mut row = vec![0.0; n];
        for &(j, a) in &c.terms {
            row[j] += a;
        }
        if row.iter().all(|&a| a == 0.0) {
            continue;
        }
        planes.push((row, c.rhs, c.relation == Relation::Eq));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), model.lower(j), false));
        planes.push((e, model.upper(j), false));
    }
    let mandatory: Vec<usize> = (0..planes.len()).filter(|&i| planes[i].2).collect();
    let optional: Vec<usize> = (0..planes.len()).filter(|&i| !planes[i].2).collect();
    let pick = n.saturating_sub(mandatory.len().min(n));
    let mut best: Option<f64> = None;
    let sign = if model.sense() == Sense::Maximize { -1.0 } else { 1.0 };
    for_each_subset(optional.len(), pick, &mut |subset| {
        let chosen: Vec<usize> = mandatory
            .iter()
            .copied()
            .take(n)
            .chain(subset.iter().map(|&k| optional[k]))
            .collect();
        let a: Vec<Vec<f64>> = chosen.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = chosen.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = gauss_solve(a, b) {
            if model.max_violation(&x) <= 1e-7 {
                let obj = sign * model.objective_value(&x);
                if best.map_or(true, |v| obj < v) {
                    best = Some(obj);
                }
            }
        }
    });
    best.map(|v| sign * v)
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Optimum of a pure binary program by walking all `2^n` assignments.
pub fn binary_enumeration(model: &MilpModel) -> Option<(f64, Vec<f64>)> {
    let n = model.num_vars();
    assert!(n <= 24, "too many variables for exhaustive enumeration");
    assert!((0..n).all(|j| model.kind(j) == VarKind::Binary));
    let sign = if model.sense() == Sense::Maximize { -1.0 } else { 1.0 };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1u32 << n) {
        let x: Vec<f64> = (0..n).map(|j| f64::from((mask >> j) & 1)).collect();
        if !model.is_feasible(&x) {
            continue;
        }
        let obj = sign * model.objective_value(&x);
        if best.as_ref().map_or(true, |(v, _)| obj < *v - 1e-12) {
            best = Some((obj, x));
        }
    }
    best.map(|(v, x)| (sign * v, x))
}

/// A feasible, box-bounded LP with `vars` variables and `rows` constraints.
pub fn random_lp<R: Rng>(rng: &mut R, vars: usize, rows: usize) -> MilpModel {
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut m = MilpModel::with_sense(sense);
    let mut anchor = Vec::with_capacity(vars);
    for j in 0..vars {
        let lo = if rng.gen_bool(0.3) { -5.0 } else { 0.0 };
        let hi = lo + rng.gen_range(2.0..10.0);
        anchor.push(rng.gen_range(lo..hi));
        m.add_continuous(format!("x{j}"), lo, hi, rng.gen_range(-5.0..5.0));
    }
    for i in 0..rows {
        let mut terms = Vec::new();
        for j in 0..vars {
            if rng.gen_bool(0.7) {
                terms.push((j, rng.gen_range(-5.0..5.0)));
            }
        }
        let at: f64 = terms.iter().map(|&(j, a)| a * anchor[j]).sum();
        let (rel, rhs) = match rng.gen_range(0..10) {
            0 => (Relation::Eq, at),
            1..=5 => (Relation::Le, at + rng.gen_range(0.0..4.0)),
            _ => (Relation::Ge, at - rng.gen_range(0.0..4.0)),
        };
        m.add_constraint(format!("c{i}"), terms, rel, rhs);
    }
    m
}

/// A pure binary program with integer data; may be infeasible.
pub fn random_binary_program<R: Rng>(rng: &mut R, vars: usize, rows: usize) -> MilpModel {
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut m = MilpModel::with_sense(sense);
    for j in 0..vars {
        m.add_binary(format!("b{j}"), f64::from(rng.gen_range(-9i32..=9)));
    }
    for i in 0..rows {
        let mut terms = Vec::new();
        for j in 0..vars {
            if rng.gen_bool(0.6) {
                terms.push((j, f64::from(rng.gen_range(-5i32..=5))));
            }
        }
        let total: f64 = terms.iter().map(|(_, a): &(usize, f64)| a.abs()).sum();
        let rhs = (rng.gen_range(-0.3..0.6) * total).round();
        let rel = match rng.gen_range(0..6) {
            0 => Relation::Eq,
            1..=3 => Relation::Le,
            _ => Relation::Ge,
        };
        m.add_constraint(format!("r{i}"), terms, rel, rhs);
    }
    m
}
