//! Cluster and head assignment for parallel simulated annealing, one cluster
//! per temperature step.

use std::fmt::Write as _;

use shmnet_lp::{MilpModel, MilpSolution, Relation, Sense, Status, VarId};

use crate::error::{Error, Result};
use crate::netmodel::{NetworkGraph, NodeId, ShortestPathTable};

/// Largest instance accepted by [`build_sa_ilp`].
pub const SA_ILP_MAX_NODES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaStep {
    /// Cluster size `k_j`.
    pub k: usize,
    /// Computations `N_j` at this temperature.
    pub iterations: f64,
    /// Probability `a_j` that a computation finds a new minimum.
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaSchedule {
    pub steps: Vec<SaStep>,
}

impl SaSchedule {
    pub fn new(steps: Vec<SaStep>) -> Self {
        SaSchedule { steps }
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn validate(&self, num_nodes: usize) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Config("schedule needs at least one step".into()));
        }
        let total: usize = self.steps.iter().map(|s| s.k).sum();
        if total > num_nodes {
            return Err(Error::Config(format!("cluster sizes sum to {total} > {num_nodes} nodes")));
        }
        for (j, s) in self.steps.iter().enumerate() {
            if s.k == 0 || !(0.0..=1.0).contains(&s.a) || s.iterations < 0.0 {
                return Err(Error::Config(format!("invalid step {j}: {s:?}")));
            }
        }
        Ok(())
    }

    /// Weight `a_j N_j` of a new minimum found at step `j`.
    fn rate(&self, j: usize) -> f64 {
        self.steps[j].a * self.steps[j].iterations
    }
}

/// Disjoint clusters `K_j` (head included) and their heads `b_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaPlan {
    pub clusters: Vec<Vec<NodeId>>,
    pub heads: Vec<NodeId>,
}

impl SaPlan {
    pub fn validate(&self, sched: &SaSchedule, num_nodes: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPlan(msg));
        if self.clusters.len() != sched.num_steps() || self.heads.len() != sched.num_steps() {
            return bad("one cluster and head per step required".into());
        }
        let mut seen = vec![false; num_nodes];
        for (j, members) in self.clusters.iter().enumerate() {
            if members.len() != sched.steps[j].k {
                return bad(format!("cluster {j} has {} nodes, wants {}", members.len(), sched.steps[j].k));
            }
            if !members.contains(&self.heads[j]) {
                return bad(format!("head {} outside cluster {j}", self.heads[j]));
            }
            for &v in members {
                if v >= num_nodes || std::mem::replace(&mut seen[v], true) {
                    return bad(format!("node {v} repeated or out of range"));
                }
            }
        }
        Ok(())
    }

    /// `cluster j head b members ...` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (j, members) in self.clusters.iter().enumerate() {
            write!(out, "cluster {j} head {} members", self.heads[j]).unwrap();
            for v in members {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// How a new minimum travels from one head to the heads of later steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeadRouting {
    /// Hop along consecutive heads `b_j -> b_{j+1} -> ...`.
    #[default]
    Chain,
    /// Send from `b_j` to every later head separately.
    Direct,
}

/// Expected transmissions of a plan.
pub fn sa_cost(plan: &SaPlan, sched: &SaSchedule, spt: &ShortestPathTable, routing: HeadRouting) -> Result<f64> {
    plan.validate(sched, spt.num_nodes())?;
    let m = sched.num_steps();
    let spread = |l: usize| -> f64 { plan.clusters[l].iter().map(|&v| spt.dist(plan.heads[l], v)).sum() };
    let mut total = 0.0;
    for j in 0..m {
        let mut per = spread(j);
        for l in j + 1..m {
            per += match routing {
                HeadRouting::Chain => spt.dist(plan.heads[l - 1], plan.heads[l]),
                HeadRouting::Direct => spt.dist(plan.heads[j], plan.heads[l]),
            };
            per += spread(l);
        }
        total += sched.rate(j) * per;
    }
    Ok(total)
}

/// Variable maps for the annealing ILP.
#[derive(Debug, Clone)]
pub struct SaIlpLayout {
    n: usize,
    m: usize,
    x_base: usize,
    y_base: usize,
    t_base: usize,
    p_base: usize,
}

impl SaIlpLayout {
    /// `x_ij`: node `i` belongs to cluster `j`.
    pub fn x(&self, i: NodeId, j: usize) -> VarId {
        self.x_base + i * self.m + j
    }

    /// `y_ij`: node `i` heads cluster `j`.
    pub fn y(&self, i: NodeId, j: usize) -> VarId {
        self.y_base + i * self.m + j
    }

    /// `t_ikj = y_ij x_kj`.
    pub fn t(&self, i: NodeId, k: NodeId, j: usize) -> VarId {
        self.t_base + (i * self.n + k) * self.m + j
    }

    /// `p_ikj = y_ij y_k(j+1)`, `j < M - 1`.
    pub fn p(&self, i: NodeId, k: NodeId, j: usize) -> VarId {
        self.p_base + (i * self.n + k) * (self.m - 1) + j
    }
}

/// Builds the annealing ILP. Besides size and product constraints it ties
/// each head to its own cluster, requires one head per step and keeps the
/// clusters disjoint.
pub fn build_sa_ilp(g: &NetworkGraph, spt: &ShortestPathTable, sched: &SaSchedule) -> Result<(MilpModel, SaIlpLayout)> {
    let n = g.num_nodes();
    sched.validate(n)?;
    if n > SA_ILP_MAX_NODES {
        return Err(Error::InstanceTooLarge(format!("annealing ILP allows {SA_ILP_MAX_NODES} nodes, got {n}")));
    }
    let m = sched.num_steps();
    let mut model = MilpModel::with_sense(Sense::Minimize);
    let x_base = model.num_vars();
    for i in 0..n {
        for j in 0..m {
            model.add_binary(format!("x[{i},{j}]"), 0.0);
        }
    }
    let y_base = model.num_vars();
    for i in 0..n {
        for j in 0..m {
            model.add_binary(format!("y[{i},{j}]"), 0.0);
        }
    }
    // t_ikj appears for its own step and for every earlier step
    let t_base = model.num_vars();
    for i in 0..n {
        for k in 0..n {
            for j in 0..m {
                let weight: f64 = (0..=j).map(|s| sched.rate(s)).sum();
                model.add_binary(format!("t[{i},{k},{j}]"), weight * spt.dist(i, k));
            }
        }
    }
    // p_ikj (head hop from step j to j+1) is paid by every step up to j
    let p_base = model.num_vars();
    for i in 0..n {
        for k in 0..n {
            for j in 0..m.saturating_sub(1) {
                let weight: f64 = (0..=j).map(|s| sched.rate(s)).sum();
                model.add_binary(format!("p[{i},{k},{j}]"), weight * spt.dist(i, k));
            }
        }
    }
    let layout = SaIlpLayout {
        n,
        m,
        x_base,
        y_base,
        t_base,
        p_base,
    };
    for j in 0..m {
        model.add_constraint(
            format!("size[{j}]"),
            (0..n).map(|i| (layout.x(i, j), 1.0)),
            Relation::Eq,
            sched.steps[j].k as f64,
        );
        model.add_constraint(
            format!("one_head[{j}]"),
            (0..n).map(|i| (layout.y(i, j), 1.0)),
            Relation::Eq,
            1.0,
        );
        for i in 0..n {
            model.add_constraint(
                format!("head_member[{i},{j}]"),
                [(layout.y(i, j), 1.0), (layout.x(i, j), -1.0)],
                Relation::Le,
                0.0,
            );
            for k in 0..n {
                model.add_constraint(
                    format!("spread[{i},{k},{j}]"),
                    [(layout.t(i, k, j), 2.0), (layout.y(i, j), -1.0), (layout.x(k, j), -1.0)],
                    Relation::Ge,
                    -1.0,
                );
                if j + 1 < m {
                    model.add_constraint(
                        format!("hop[{i},{k},{j}]"),
                        [(layout.p(i, k, j), 2.0), (layout.y(i, j), -1.0), (layout.y(k, j + 1), -1.0)],
                        Relation::Ge,
                        -1.0,
                    );
                }
            }
        }
    }
    for i in 0..n {
        model.add_constraint(
            format!("disjoint[{i}]"),
            (0..m).map(|j| (layout.x(i, j), 1.0)),
            Relation::Le,
            1.0,
        );
    }
    Ok((model, layout))
}

pub fn extract_sa_plan(sol: &MilpSolution, layout: &SaIlpLayout) -> Result<SaPlan> {
    if sol.status != Status::Optimal {
        return Err(Error::InconsistentSolution(format!("status {:?}", sol.status)));
    }
    let mut clusters = vec![Vec::new(); layout.m];
    let mut heads = vec![usize::MAX; layout.m];
    for j in 0..layout.m {
        for i in 0..layout.n {
            if sol.is_set(layout.x(i, j)) {
                clusters[j].push(i);
            }
            if sol.is_set(layout.y(i, j)) {
                heads[j] = i;
            }
        }
    }
    Ok(SaPlan { clusters, heads })
}

/// Greedy planner: from the coldest step upwards, pick the head whose
/// `k_j - 1` nearest remaining nodes (plus the hop to the next step's head)
/// are cheapest to reach.
pub fn sa_greedy(g: &NetworkGraph, spt: &ShortestPathTable, sched: &SaSchedule) -> Result<SaPlan> {
    let n = g.num_nodes();
    sched.validate(n)?;
    let m = sched.num_steps();
    let mut pool: Vec<NodeId> = (0..n).collect();
    let mut clusters = vec![Vec::new(); m];
    let mut heads = vec![0; m];
    for j in (0..m).rev() {
        let mut best: Option<(f64, NodeId, Vec<NodeId>)> = None;
        for &b in &pool {
            let mut others: Vec<NodeId> = pool.iter().copied().filter(|&v| v != b).collect();
            others.sort_by(|&u, &v| spt.dist(u, b).total_cmp(&spt.dist(v, b)).then(u.cmp(&v)));
            others.truncate(sched.steps[j].k - 1);
            let mut e: f64 = others.iter().map(|&v| spt.dist(v, b)).sum();
            if j + 1 < m {
                e += spt.dist(heads[j + 1], b);
            }
            if best.as_ref().map_or(true, |(be, _, _)| e < *be) {
                best = Some((e, b, others));
            }
        }
        let (_, b, mut members) = best.expect("pool holds enough nodes");
        members.push(b);
        members.sort_unstable();
        pool.retain(|v| !members.contains(v));
        heads[j] = b;
        clusters[j] = members;
    }
    Ok(SaPlan { clusters, heads })
}
