//! Communication plans: which node evaluates which FFTs, energy accounting,
//! tree solutions and the energy lower bound.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::netmodel::{DelayConstraints, EnergyParams, NetworkGraph, NodeId, ShortestPathTable, BASE};
use crate::trees::{build_dct, RoutedTree};

/// The assignment `x_ij`: `evals[i]` holds every `j` at which node `i`'s FFT
/// is evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommPlan {
    evals: Vec<BTreeSet<NodeId>>,
}

impl CommPlan {
    pub fn empty(num_nodes: usize) -> Self {
        CommPlan {
            evals: vec![BTreeSet::new(); num_nodes],
        }
    }

    pub fn from_pairs(num_nodes: usize, pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let mut p = Self::empty(num_nodes);
        for (i, j) in pairs {
            p.set(i, j);
        }
        p
    }

    /// Marks node `i`'s FFT as evaluated at `j`.
    pub fn set(&mut self, i: NodeId, j: NodeId) {
        self.evals[i].insert(j);
    }

    pub fn is_set(&self, i: NodeId, j: NodeId) -> bool {
        self.evals[i].contains(&j)
    }

    pub fn num_nodes(&self) -> usize {
        self.evals.len()
    }

    pub fn evaluations_of(&self, i: NodeId) -> &BTreeSet<NodeId> {
        &self.evals[i]
    }

    /// All `(i, j)` with `x_ij = 1`, sorted.
    pub fn pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.evals
            .iter()
            .enumerate()
            .flat_map(|(i, js)| js.iter().map(move |&j| (i, j)))
            .collect()
    }

    /// Cluster heads `S = {j : x_jj = 1}`.
    pub fn heads(&self) -> Vec<NodeId> {
        (0..self.num_nodes()).filter(|&j| self.is_set(j, j)).collect()
    }

    /// Cluster `N_j = {i : x_ij = 1}`.
    pub fn cluster(&self, j: NodeId) -> Vec<NodeId> {
        (0..self.num_nodes()).filter(|&i| self.is_set(i, j)).collect()
    }

    pub fn relabeled(&self, perm: &[NodeId]) -> Self {
        Self::from_pairs(self.num_nodes(), self.pairs().into_iter().map(|(i, j)| (perm[i], perm[j])))
    }

    /// `eval i j` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.pairs() {
            writeln!(out, "eval {i} {j}").unwrap();
        }
        out
    }

    fn basic_violations(&self) -> Vec<Violation> {
        let n = self.num_nodes();
        let mut out = Vec::new();
        for (i, js) in self.evals.iter().enumerate() {
            if let Some(&j) = js.iter().find(|&&j| j >= n) {
                out.push(Violation::NodeOutOfRange(j));
            }
            if js.is_empty() {
                out.push(Violation::Uncovered(i));
            }
        }
        for j in 0..n {
            let serves_others = (0..n).any(|i| i != j && self.is_set(i, j));
            if serves_others != self.is_set(j, j) {
                out.push(Violation::HeadMismatch(j));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accounting {
    /// Every evaluated FFT routes its own eigenvector to the base.
    PerEvaluation,
    /// The closed form for tree solutions, where eigenvectors merge en route.
    MergedClosedForm,
}

impl fmt::Display for Accounting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Accounting::PerEvaluation => "per_evaluation",
            Accounting::MergedClosedForm => "merged_closed_form",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub total: f64,
    pub fft_component: f64,
    pub eig_component: f64,
    pub accounting: Accounting,
}

impl EnergyReport {
    fn new(fft_component: f64, eig_component: f64, accounting: Accounting) -> Self {
        EnergyReport {
            total: fft_component + eig_component,
            fft_component,
            eig_component,
            accounting,
        }
    }

    /// `total,fft_component,eig_component,accounting`
    pub fn to_csv_fields(&self) -> String {
        format!("{},{},{},{}", self.total, self.fft_component, self.eig_component, self.accounting)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NodeOutOfRange(NodeId),
    /// Node's FFT is evaluated nowhere.
    Uncovered(NodeId),
    /// `x_jj` disagrees with whether `j` evaluates other nodes' FFTs.
    HeadMismatch(NodeId),
    /// Cluster at `j` exceeds `n_j`.
    DelayViolation(NodeId),
    /// Cluster at head `j` is smaller than `n_a`.
    AccuracyViolation(NodeId),
    NotCombinable,
}

/// Whether the clusters' overlap graph on the heads is connected.
pub fn check_combinable(p: &CommPlan) -> bool {
    let heads = p.heads();
    if heads.len() <= 1 {
        return true;
    }
    let members: Vec<BTreeSet<NodeId>> = heads.iter().map(|&s| p.cluster(s).into_iter().collect()).collect();
    let mut seen = vec![false; heads.len()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(a) = stack.pop() {
        for b in 0..heads.len() {
            if !seen[b] && !members[a].is_disjoint(&members[b]) {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Energy under per-evaluation accounting:
/// `sum over x_ij = 1 of e_b (R W_ij + r W_j0)`.
pub fn plan_energy(p: &CommPlan, spt: &ShortestPathTable, e: &EnergyParams) -> Result<EnergyReport> {
    if p.num_nodes() != spt.num_nodes() {
        return Err(Error::InvalidPlan("plan and graph sizes differ".into()));
    }
    if let Some(v) = p.basic_violations().first() {
        return Err(Error::InvalidPlan(format!("{v:?}")));
    }
    let (mut fft, mut eig) = (0.0, 0.0);
    for (i, j) in p.pairs() {
        fft += e.e_b() * e.fft_bytes * spt.dist(i, j);
        eig += e.e_b() * e.eig_bytes * spt.dist(j, BASE);
    }
    Ok(EnergyReport::new(fft, eig, Accounting::PerEvaluation))
}

/// Every node sends its FFT to its parent; non-leaf nodes are the heads.
pub fn tree_solution(t: &RoutedTree) -> CommPlan {
    let mut p = CommPlan::empty(t.num_nodes());
    for v in 0..t.num_nodes() {
        if let Some(u) = t.parent(v) {
            p.set(v, u);
            p.set(u, u);
        }
    }
    p
}

/// `e_b ((|V|-1) R + sum_v (d_T(v) - 1) r + |S| r)` with the sum over all
/// nodes, the base included.
pub fn closed_form_tree_energy(t: &RoutedTree, e: &EnergyParams) -> EnergyReport {
    let n = t.num_nodes() as f64;
    let depth_term: f64 = (0..t.num_nodes()).map(|v| t.depth(v) as f64 - 1.0).sum();
    let heads = t.metrics().non_leaf_count as f64;
    EnergyReport::new(
        e.e_b() * (n - 1.0) * e.fft_bytes,
        e.e_b() * (depth_term + heads) * e.eig_bytes,
        Accounting::MergedClosedForm,
    )
}

/// Lower bound on the energy of any plan with `s_count` heads.
pub fn lower_bound(g: &NetworkGraph, e: &EnergyParams, s_count: usize) -> f64 {
    let dct = build_dct(g);
    let n = g.num_nodes() as f64;
    let depth_term: f64 = (0..g.num_nodes()).map(|v| dct.depth(v) as f64 - 1.0).sum();
    e.e_b() * ((n - 1.0) * e.fft_bytes + (depth_term + s_count as f64) * e.eig_bytes)
}

/// Minimum number of heads any plan needs: `ceil(|V| / n_max)`.
pub fn min_head_count(num_nodes: usize, c: &DelayConstraints) -> usize {
    num_nodes.div_ceil(c.n_max().max(1))
}

/// [`lower_bound`] with `s_count = ceil(|V| / n_max)`.
pub fn lower_bound_for(g: &NetworkGraph, c: &DelayConstraints, e: &EnergyParams) -> f64 {
    lower_bound(g, e, min_head_count(g.num_nodes(), c))
}

/// All constraint violations of `p`; empty means the plan is valid.
pub fn validate_plan(p: &CommPlan, c: &DelayConstraints) -> Vec<Violation> {
    let mut out = p.basic_violations();
    if out.iter().any(|v| matches!(v, Violation::NodeOutOfRange(_))) {
        return out;
    }
    for j in 0..p.num_nodes() {
        let size = p.cluster(j).len();
        if size > c.n.get(j).copied().unwrap_or(0) {
            out.push(Violation::DelayViolation(j));
        }
        if let Some(n_a) = c.n_a {
            if p.is_set(j, j) && size < n_a {
                out.push(Violation::AccuracyViolation(j));
            }
        }
    }
    if !check_combinable(p) {
        out.push(Violation::NotCombinable);
    }
    out
}

/// Energy when every node ships its FFT straight to the base.
pub fn centralized_baseline_energy(g: &NetworkGraph, spt: &ShortestPathTable, e: &EnergyParams) -> f64 {
    (1..g.num_nodes())
        .map(|v| e.e_b() * e.fft_bytes * spt.dist(v, BASE))
        .sum()
}
