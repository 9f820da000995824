//! Dense bounded-variable simplex.
//!
//! Every row `a x (rel) b` gets a slack column so that it reads `a x + s = b`
//! with the slack bounded according to the relation. The slack columns of the
//! tableau therefore always hold `B^-1`, which is used to recompute basic
//! values from scratch instead of trusting incrementally updated ones.

use crate::model::{LpSolution, MilpModel, Relation, Sense, Status};
use crate::tol;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const BLAND_AFTER: usize = 30;
/// Basic values are recomputed from `B^-1` at this pivot interval.
const REFRESH_EVERY: usize = 64;
/// Relative tolerance for ratio-test ties.
const TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Place {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable resting at zero.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

enum Step {
    Flip(f64),
    Pivot { row: usize, theta: f64, to_upper: bool },
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    m: usize,
    n_struct: usize,
    ncols: usize,
    /// Row-major `m x ncols` tableau.
    t: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    relations: Vec<Relation>,
    b: Vec<f64>,
    /// `(row, sign)` of every artificial column, in column order.
    artificials: Vec<(usize, f64)>,
    basis: Vec<usize>,
    place: Vec<Place>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    /// Phase-two costs in minimization form.
    cost: Vec<f64>,
    /// Reduced costs for whichever cost vector is active.
    d: Vec<f64>,
    sense: Sense,
    empty_row_infeasible: bool,
    pub(crate) iterations: usize,
}

impl Simplex {
    pub(crate) fn new(model: &MilpModel) -> Self {
        let n = model.num_vars();
        let lo: Vec<f64> = (0..n).map(|j| model.lower(j)).collect();
        let hi: Vec<f64> = (0..n).map(|j| model.upper(j)).collect();
        let sign = match model.sense() {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let cost: Vec<f64> = (0..n).map(|j| sign * model.cost(j)).collect();

        let mut rows = Vec::new();
        let mut relations = Vec::new();
        let mut b = Vec::new();
        let mut empty_row_infeasible = false;
        for c in model.constraints() {
            if c.terms.is_empty() {
                if !c.relation.holds(0.0, c.rhs, tol::FEASIBILITY) {
                    empty_row_infeasible = true;
                }
                continue;
            }
            rows.push(c.terms.clone());
            relations.push(c.relation);
            b.push(c.rhs);
        }
        Self::build(rows, relations, b, lo, hi, cost, model.sense(), empty_row_infeasible)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        rows: Vec<Vec<(usize, f64)>>,
        relations: Vec<Relation>,
        b: Vec<f64>,
        struct_lo: Vec<f64>,
        struct_hi: Vec<f64>,
        struct_cost: Vec<f64>,
        sense: Sense,
        empty_row_infeasible: bool,
    ) -> Self {
        let m = rows.len();
        let n = struct_lo.len();

        let mut x = Vec::with_capacity(n + m);
        let mut place = Vec::with_capacity(n + m);
        for j in 0..n {
            let (p, v) = resting_place(struct_lo[j], struct_hi[j]);
            place.push(p);
            x.push(v);
        }

        let mut lo = struct_lo;
        let mut hi = struct_hi;
        let mut basis = vec![usize::MAX; m];
        let mut artificials = Vec::new();
        for i in 0..m {
            let (slo, shi) = match relations[i] {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(slo);
            hi.push(shi);
            let residual = b[i] - rows[i].iter().map(|&(j, a)| a * x[j]).sum::<f64>();
            if residual >= slo - tol::FEASIBILITY && residual <= shi + tol::FEASIBILITY {
                place.push(Place::Basic);
                x.push(residual);
                basis[i] = n + i;
            } else {
                let (p, bound) = if residual < slo {
                    (Place::Lower, slo)
                } else {
                    (Place::Upper, shi)
                };
                place.push(p);
                x.push(bound);
                let sign = if residual > bound { 1.0 } else { -1.0 };
                artificials.push((i, sign));
            }
        }
        let ncols = n + m + artificials.len();
        for (k, &(i, sign)) in artificials.iter().enumerate() {
            let col = n + m + k;
            lo.push(0.0);
            hi.push(f64::INFINITY);
            place.push(Place::Basic);
            let residual = b[i] - rows[i].iter().map(|&(j, a)| a * x[j]).sum::<f64>() - x[n + i];
            x.push(residual * sign);
            basis[i] = col;
        }

        let mut t = vec![0.0; m * ncols];
        for i in 0..m {
            let scale = if basis[i] >= n + m {
                artificials[basis[i] - n - m].1
            } else {
                1.0
            };
            let row = &mut t[i * ncols..(i + 1) * ncols];
            for &(j, a) in &rows[i] {
                row[j] = a * scale;
            }
            row[n + i] = scale;
        }
        for (k, &(i, _)) in artificials.iter().enumerate() {
            // sign * sign == 1 after scaling the row
            t[i * ncols + n + m + k] = 1.0;
        }

        let mut cost = struct_cost;
        cost.resize(ncols, 0.0);
        Simplex {
            m,
            n_struct: n,
            ncols,
            t,
            rows,
            relations,
            b,
            artificials,
            basis,
            place,
            lo,
            hi,
            x,
            cost,
            d: vec![0.0; ncols],
            sense,
            empty_row_infeasible,
            iterations: 0,
        }
    }

    fn iteration_cap(&self) -> usize {
        1000 + 100 * (self.m + self.ncols)
    }

    /// Two-phase primal simplex from the initial slack/artificial basis.
    pub(crate) fn solve(&mut self) -> Outcome {
        if self.empty_row_infeasible {
            return Outcome::Infeasible;
        }
        if (0..self.n_struct).any(|j| self.lo[j] > self.hi[j]) {
            return Outcome::Infeasible;
        }
        let cap = self.iterations + self.iteration_cap();
        if !self.artificials.is_empty() {
            let art_start = self.n_struct + self.m;
            let mut phase1 = vec![0.0; self.ncols];
            for c in phase1.iter_mut().skip(art_start) {
                *c = 1.0;
            }
            self.compute_reduced_costs(&phase1);
            match self.primal(&phase1, cap) {
                Outcome::Optimal => {}
                Outcome::IterationLimit => return Outcome::IterationLimit,
                // phase one is bounded below by zero
                Outcome::Unbounded | Outcome::Infeasible => return Outcome::Infeasible,
            }
            self.refresh_basics();
            let infeasibility: f64 = (art_start..self.ncols).map(|c| self.x[c].abs()).sum();
            let scale = 1.0 + self.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if infeasibility > tol::FEASIBILITY * scale {
                return Outcome::Infeasible;
            }
            self.retire_artificials();
        }
        let cost = self.cost.clone();
        self.compute_reduced_costs(&cost);
        let cap = self.iterations + self.iteration_cap();
        self.primal(&cost, cap)
    }

    /// Fixes artificial columns at zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        let art_start = self.n_struct + self.m;
        for c in art_start..self.ncols {
            self.lo[c] = 0.0;
            self.hi[c] = 0.0;
            if self.place[c] != Place::Basic {
                self.place[c] = Place::Lower;
                self.x[c] = 0.0;
            }
        }
        for r in 0..self.m {
            if self.basis[r] < art_start {
                continue;
            }
            let row = &self.t[r * self.ncols..(r + 1) * self.ncols];
            let entering = (0..art_start)
                .filter(|&j| self.place[j] != Place::Basic)
                .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()).then(b.cmp(&a)));
            if let Some(j) = entering {
                if row[j].abs() > 1e-7 {
                    let leaving = self.basis[r];
                    self.pivot(r, j);
                    self.place[leaving] = Place::Lower;
                    self.x[leaving] = 0.0;
                }
            }
        }
        self.refresh_basics();
    }

    fn compute_reduced_costs(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[r * self.ncols..(r + 1) * self.ncols];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    /// Recomputes basic values as `B^-1 (b - N x_N)`.
    fn refresh_basics(&mut self) {
        let n = self.n_struct;
        let mut residual = self.b.clone();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                if self.place[j] != Place::Basic {
                    residual[i] -= a * self.x[j];
                }
            }
            if self.place[n + i] != Place::Basic {
                residual[i] -= self.x[n + i];
            }
        }
        for (k, &(i, sign)) in self.artificials.iter().enumerate() {
            let c = n + self.m + k;
            if self.place[c] != Place::Basic {
                residual[i] -= sign * self.x[c];
            }
        }
        for r in 0..self.m {
            let row = &self.t[r * self.ncols + n..r * self.ncols + n + self.m];
            let v: f64 = row.iter().zip(&residual).map(|(a, b)| a * b).sum();
            self.x[self.basis[r]] = v;
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.hi[j] - self.lo[j] <= 0.0
    }

    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncols {
            let dj = self.d[j];
            let candidate = match self.place[j] {
                Place::Basic => None,
                _ if self.is_fixed(j) => None,
                Place::Lower if dj < -tol::OPTIMALITY => Some((-dj, 1.0)),
                Place::Upper if dj > tol::OPTIMALITY => Some((dj, -1.0)),
                Place::Free if dj.abs() > tol::OPTIMALITY => Some((dj.abs(), -dj.signum())),
                _ => None,
            };
            if let Some((score, dir)) = candidate {
                if bland {
                    return Some((j, dir));
                }
                if best.map_or(true, |(_, s, _)| score > s) {
                    best = Some((j, score, dir));
                }
            }
        }
        best.map(|(j, _, dir)| (j, dir))
    }

    fn ratio(&self, j: usize, dir: f64, bland: bool) -> Option<Step> {
        let mut best: Option<(usize, f64, f64, bool)> = None;
        for r in 0..self.m {
            let alpha = self.t[r * self.ncols + j];
            if alpha.abs() <= tol::PIVOT {
                continue;
            }
            let rate = -alpha * dir;
            let bv = self.basis[r];
            let xb = self.x[bv];
            let (theta, to_upper) = if rate < 0.0 {
                if !self.lo[bv].is_finite() {
                    continue;
                }
                (((xb - self.lo[bv]) / -rate).max(0.0), false)
            } else {
                if !self.hi[bv].is_finite() {
                    continue;
                }
                (((self.hi[bv] - xb) / rate).max(0.0), true)
            };
            let replace = match best {
                None => true,
                Some((br, bt, ba, _)) => {
                    let tie = TIE * (1.0 + bt.abs());
                    if theta < bt - tie {
                        true
                    } else if theta <= bt + tie {
                        if bland {
                            bv < self.basis[br]
                        } else {
                            alpha.abs() > ba || (alpha.abs() == ba && bv < self.basis[br])
                        }
                    } else {
                        false
                    }
                }
            };
            if replace {
                best = Some((r, theta, alpha.abs(), to_upper));
            }
        }
        let range = self.hi[j] - self.lo[j];
        if range.is_finite() && best.map_or(true, |(_, bt, _, _)| range <= bt) {
            return Some(Step::Flip(range));
        }
        best.map(|(row, theta, _, to_upper)| Step::Pivot {
            row,
            theta,
            to_upper,
        })
    }

    fn primal(&mut self, cost: &[f64], cap: usize) -> Outcome {
        let mut degenerate_run = 0usize;
        let mut since_refresh = 0usize;
        loop {
            if self.iterations >= cap {
                return Outcome::IterationLimit;
            }
            let bland = degenerate_run > BLAND_AFTER;
            let Some((j, dir)) = self.price(bland) else {
                self.refresh_basics();
                self.compute_reduced_costs(cost);
                // re-check after the refresh removed accumulated drift
                if self.price(true).is_none() {
                    return Outcome::Optimal;
                }
                continue;
            };
            let theta = match self.ratio(j, dir, bland) {
                None => return Outcome::Unbounded,
                Some(Step::Flip(theta)) => {
                    self.shift_basics(j, dir * theta);
                    self.x[j] += dir * theta;
                    self.place[j] = if dir > 0.0 { Place::Upper } else { Place::Lower };
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                    theta
                }
                Some(Step::Pivot { row, theta, to_upper }) => {
                    self.shift_basics(j, dir * theta);
                    self.x[j] += dir * theta;
                    let leaving = self.basis[row];
                    self.x[leaving] = if to_upper { self.hi[leaving] } else { self.lo[leaving] };
                    self.place[leaving] = if to_upper { Place::Upper } else { Place::Lower };
                    self.pivot(row, j);
                    theta
                }
            };
            self.iterations += 1;
            if theta <= TIE {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            since_refresh += 1;
            if since_refresh >= REFRESH_EVERY {
                since_refresh = 0;
                self.refresh_basics();
            }
        }
    }

    /// Moves nonbasic column `j` by `delta`, updating basic values.
    fn shift_basics(&mut self, j: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        for r in 0..self.m {
            let a = self.t[r * self.ncols + j];
            if a != 0.0 {
                self.x[self.basis[r]] -= a * delta;
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let inv = 1.0 / self.t[r * nc + j];
        let pivot_row: Vec<f64> = {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v *= inv;
                if v.abs() < tol::DROP {
                    *v = 0.0;
                }
            }
            row[j] = 1.0;
            row.to_vec()
        };
        let nz: Vec<usize> = (0..nc).filter(|&k| pivot_row[k] != 0.0).collect();
        for rr in 0..self.m {
            if rr == r {
                continue;
            }
            let f = self.t[rr * nc + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[rr * nc..(rr + 1) * nc];
            for &k in &nz {
                let v = row[k] - f * pivot_row[k];
                row[k] = if v.abs() < tol::DROP { 0.0 } else { v };
            }
            row[j] = 0.0;
        }
        let f = self.d[j];
        if f != 0.0 {
            for &k in &nz {
                self.d[k] -= f * pivot_row[k];
            }
        }
        self.d[j] = 0.0;
        let leaving = self.basis[r];
        if self.place[leaving] == Place::Basic {
            self.place[leaving] = Place::Lower;
        }
        self.basis[r] = j;
        self.place[j] = Place::Basic;
    }

    /// Tightens the bounds of a structural variable. Nonbasic variables are
    /// moved onto the new bound on the same side; basic ones may become
    /// infeasible, which [`Simplex::reoptimize`] repairs.
    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.place[j] == Place::Basic {
            return;
        }
        let preferred = self.place[j];
        let (p, v) = match preferred {
            Place::Upper if hi.is_finite() => (Place::Upper, hi),
            Place::Lower if lo.is_finite() => (Place::Lower, lo),
            _ => resting_place(lo, hi),
        };
        self.place[j] = p;
        self.x[j] = v;
    }

    fn dual_feasible(&self) -> bool {
        (0..self.ncols).all(|j| match self.place[j] {
            Place::Basic => true,
            _ if self.is_fixed(j) => true,
            Place::Lower => self.d[j] >= -1e-7,
            Place::Upper => self.d[j] <= 1e-7,
            Place::Free => self.d[j].abs() <= 1e-7,
        })
    }

    /// Restores optimality after [`Simplex::set_bounds`], warm-starting from
    /// the current basis with the dual simplex.
    pub(crate) fn reoptimize(&mut self) -> Outcome {
        if (0..self.n_struct).any(|j| self.lo[j] > self.hi[j]) {
            return Outcome::Infeasible;
        }
        self.refresh_basics();
        let cost = self.cost.clone();
        if self.dual_feasible() {
            let cap = self.iterations + self.iteration_cap();
            match self.dual(cap) {
                Outcome::Optimal => {
                    let cap = self.iterations + self.iteration_cap();
                    let out = self.primal(&cost, cap);
                    if out != Outcome::IterationLimit {
                        return out;
                    }
                }
                Outcome::Infeasible => return Outcome::Infeasible,
                _ => {}
            }
        }
        *self = self.rebuilt();
        self.solve()
    }

    /// A fresh simplex over the same rows with the current structural bounds.
    fn rebuilt(&self) -> Simplex {
        let n = self.n_struct;
        let mut fresh = Simplex::build(
            self.rows.clone(),
            self.relations.clone(),
            self.b.clone(),
            self.lo[..n].to_vec(),
            self.hi[..n].to_vec(),
            self.cost[..n].to_vec(),
            self.sense,
            self.empty_row_infeasible,
        );
        fresh.iterations = self.iterations;
        fresh
    }

    fn dual(&mut self, cap: usize) -> Outcome {
        let mut degenerate_run = 0usize;
        let mut since_refresh = 0usize;
        loop {
            if self.iterations >= cap {
                return Outcome::IterationLimit;
            }
            let bland = degenerate_run > BLAND_AFTER;
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let bv = self.basis[r];
                let xb = self.x[bv];
                let infeas = if xb < self.lo[bv] - tol::FEASIBILITY {
                    self.lo[bv] - xb
                } else if xb > self.hi[bv] + tol::FEASIBILITY {
                    xb - self.hi[bv]
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((br, bi)) => {
                        if bland {
                            bv < self.basis[br]
                        } else {
                            infeas > bi
                        }
                    }
                };
                if better {
                    leave = Some((r, infeas));
                }
            }
            let Some((r, _)) = leave else {
                self.refresh_basics();
                let still = (0..self.m).any(|r| {
                    let bv = self.basis[r];
                    self.x[bv] < self.lo[bv] - tol::FEASIBILITY || self.x[bv] > self.hi[bv] + tol::FEASIBILITY
                });
                if still {
                    continue;
                }
                return Outcome::Optimal;
            };
            let bv = self.basis[r];
            let increase = self.x[bv] < self.lo[bv];
            let target = if increase { self.lo[bv] } else { self.hi[bv] };

            let row = &self.t[r * self.ncols..(r + 1) * self.ncols];
            let mut enter: Option<(usize, f64, f64)> = None;
            for j in 0..self.ncols {
                let alpha = row[j];
                if alpha.abs() <= tol::PIVOT || self.place[j] == Place::Basic || self.is_fixed(j) {
                    continue;
                }
                let (eligible, dj) = match (self.place[j], increase) {
                    (Place::Lower, true) => (alpha < 0.0, self.d[j].max(0.0)),
                    (Place::Upper, true) => (alpha > 0.0, (-self.d[j]).max(0.0)),
                    (Place::Lower, false) => (alpha > 0.0, self.d[j].max(0.0)),
                    (Place::Upper, false) => (alpha < 0.0, (-self.d[j]).max(0.0)),
                    (Place::Free, _) => (true, self.d[j].abs()),
                    (Place::Basic, _) => (false, 0.0),
                };
                if !eligible {
                    continue;
                }
                let ratio = dj / alpha.abs();
                let replace = match enter {
                    None => true,
                    Some((bj, br, ba)) => {
                        let tie = TIE * (1.0 + br.abs());
                        if ratio < br - tie {
                            true
                        } else if ratio <= br + tie {
                            if bland {
                                j < bj
                            } else {
                                alpha.abs() > ba
                            }
                        } else {
                            false
                        }
                    }
                };
                if replace {
                    enter = Some((j, ratio, alpha.abs()));
                }
            }
            let Some((j, ratio, _)) = enter else {
                return Outcome::Infeasible;
            };
            let alpha = self.t[r * self.ncols + j];
            let delta = (self.x[bv] - target) / alpha;
            self.shift_basics(j, delta);
            self.x[j] += delta;
            self.x[bv] = target;
            self.place[bv] = if increase { Place::Lower } else { Place::Upper };
            self.pivot(r, j);
            self.place[bv] = if increase { Place::Lower } else { Place::Upper };
            self.iterations += 1;
            if ratio <= TIE {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            since_refresh += 1;
            if since_refresh >= REFRESH_EVERY {
                since_refresh = 0;
                self.refresh_basics();
            }
        }
    }

    pub(crate) fn values(&self) -> Vec<f64> {
        (0..self.n_struct)
            .map(|j| {
                let v = self.x[j];
                // snap onto bounds violated only by rounding noise
                if v < self.lo[j] && v > self.lo[j] - tol::FEASIBILITY {
                    self.lo[j]
                } else if v > self.hi[j] && v < self.hi[j] + tol::FEASIBILITY {
                    self.hi[j]
                } else {
                    v
                }
            })
            .collect()
    }

    /// Objective in minimization form.
    pub(crate) fn min_objective(&self) -> f64 {
        (0..self.n_struct).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub(crate) fn basic_flags(&self) -> Vec<bool> {
        (0..self.n_struct).map(|j| self.place[j] == Place::Basic).collect()
    }

    pub(crate) fn lower(&self, j: usize) -> f64 {
        self.lo[j]
    }

    pub(crate) fn upper(&self, j: usize) -> f64 {
        self.hi[j]
    }
}

fn resting_place(lo: f64, hi: f64) -> (Place, f64) {
    if lo.is_finite() {
        (Place::Lower, lo)
    } else if hi.is_finite() {
        (Place::Upper, hi)
    } else {
        (Place::Free, 0.0)
    }
}

/// Solves the continuous relaxation of `model`, ignoring integrality flags.
///
/// Returns a vertex-optimal solution, or an `Infeasible`/`Unbounded` status.
///
/// # Panics
///
/// Panics on non-finite model data or if the simplex fails to converge.
pub fn solve_lp(model: &MilpModel) -> LpSolution {
    if let Err(e) = model.validate() {
        match e {
            crate::ModelError::EmptyBounds { .. } => {
                return LpSolution {
                    status: Status::Infeasible,
                    values: vec![0.0; model.num_vars()],
                    objective_value: f64::NAN,
                    basic: vec![false; model.num_vars()],
                    iterations: 0,
                }
            }
            other => panic!("invalid model: {other}"),
        }
    }
    let mut s = Simplex::new(model);
    let outcome = s.solve();
    let status = match outcome {
        Outcome::Optimal => Status::Optimal,
        Outcome::Infeasible => Status::Infeasible,
        Outcome::Unbounded => Status::Unbounded,
        Outcome::IterationLimit => panic!("simplex iteration limit reached"),
    };
    let values = s.values();
    let objective_value = match status {
        Status::Optimal => model.objective_value(&values),
        Status::Infeasible => f64::NAN,
        Status::Unbounded => match model.sense() {
            Sense::Minimize => f64::NEG_INFINITY,
            Sense::Maximize => f64::INFINITY,
        },
    };
    LpSolution {
        status,
        values,
        objective_value,
        basic: s.basic_flags(),
        iterations: s.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarKind;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn single_lower_bound_row() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 10.0, 1.0);
        m.add_constraint("c", [(x, 1.0)], Relation::Ge, 5.0);
        let s = solve_lp(&m);
        assert_eq!(s.status, Status::Optimal);
        assert!(approx(s.values[x], 5.0));
        assert!(approx(s.objective_value, 5.0));
    }

    #[test]
    fn returns_a_vertex_of_the_simplex() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY, -1.0);
        let y = m.add_continuous("y", 0.0, f64::INFINITY, -1.0);
        m.add_constraint("c", [(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let s = solve_lp(&m);
        assert_eq!(s.status, Status::Optimal);
        assert!(approx(s.objective_value, -1.0));
        let (a, b) = (s.values[x], s.values[y]);
        assert!((approx(a, 1.0) && approx(b, 0.0)) || (approx(a, 0.0) && approx(b, 1.0)));
    }

    #[test]
    fn detects_unbounded() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY, -1.0);
        let y = m.add_continuous("y", 0.0, f64::INFINITY, 0.0);
        m.add_constraint("c", [(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&m).status, Status::Unbounded);
    }

    #[test]
    fn detects_infeasible_rows() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0, 1.0);
        m.add_constraint("c", [(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&m).status, Status::Infeasible);
    }

    #[test]
    fn empty_constraints_are_dropped_or_rejected() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0, 1.0);
        m.add_constraint("empty", [(x, 0.0)], Relation::Le, 3.0);
        assert_eq!(solve_lp(&m).status, Status::Optimal);
        m.add_constraint("bad", std::iter::empty(), Relation::Ge, 1.0);
        assert_eq!(solve_lp(&m).status, Status::Infeasible);
    }

    #[test]
    fn equality_and_free_variables() {
        // min x - y, x + y = 4, x - y >= -2, y free, x in [0, 3]
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 3.0, 1.0);
        let y = m.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY, -1.0);
        m.add_constraint("sum", [(x, 1.0), (y, 1.0)], Relation::Eq, 4.0);
        m.add_constraint("gap", [(x, 1.0), (y, -1.0)], Relation::Ge, -2.0);
        let s = solve_lp(&m);
        assert_eq!(s.status, Status::Optimal);
        assert!(approx(s.values[x], 1.0), "{:?}", s.values);
        assert!(approx(s.values[y], 3.0));
        assert!(approx(s.objective_value, -2.0));
    }

    #[test]
    fn maximize_sense() {
        let mut m = MilpModel::with_sense(Sense::Maximize);
        let a = m.add_var("a", VarKind::Binary, 0.0, 1.0, 3.0);
        let b = m.add_var("b", VarKind::Binary, 0.0, 1.0, 2.0);
        m.add_constraint("c", [(a, 1.0), (b, 1.0)], Relation::Le, 1.5);
        let s = solve_lp(&m);
        assert!(approx(s.objective_value, 4.0));
    }

    #[test]
    fn warm_start_after_tightening_matches_fresh_solve() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 4.0, -1.0);
        let y = m.add_continuous("y", 0.0, 4.0, -2.0);
        m.add_constraint("c1", [(x, 1.0), (y, 1.0)], Relation::Le, 5.0);
        m.add_constraint("c2", [(x, -1.0), (y, 2.0)], Relation::Le, 4.0);
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve(), Outcome::Optimal);
        s.set_bounds(y, 0.0, 2.0);
        assert_eq!(s.reoptimize(), Outcome::Optimal);

        let mut fresh = m.clone();
        fresh.set_bounds(y, 0.0, 2.0);
        let f = solve_lp(&fresh);
        assert!(approx(m.objective_value(&s.values()), f.objective_value));
    }

    #[test]
    fn rebuilt_tableau_gets_a_fresh_iteration_allowance() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 4.0, -1.0);
        let y = m.add_continuous("y", 0.0, 4.0, -2.0);
        m.add_constraint("c1", [(x, 1.0), (y, 1.0)], Relation::Ge, 1.0);
        m.add_constraint("c2", [(x, -1.0), (y, 2.0)], Relation::Le, 4.0);
        let mut s = Simplex::new(&m);
        s.iterations = 10 * s.iteration_cap();
        let mut s = s.rebuilt();
        assert_eq!(s.solve(), Outcome::Optimal);
    }
}
