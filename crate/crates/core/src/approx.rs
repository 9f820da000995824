//! Approximation algorithms for degree-constrained collection trees: LP
//! rounding (LPR) and the modified Dijkstra construction (DAA).

use std::fmt::Write as _;

use shmnet_lp::{solve_lp, Status};

use crate::error::{Error, Result};
use crate::milp_models::build_ilp_p3;
use crate::netmodel::{DelayConstraints, NetworkGraph, NodeId, BASE};
use crate::trees::{build_dct, RoutedTree};

/// Rounding state: attached nodes, fixed tree arcs and assigned heights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LprState {
    pub parent: Vec<Option<NodeId>>,
    /// Height per node, `-1` while unattached.
    pub height: Vec<i64>,
    pub level: i64,
}

impl LprState {
    fn new(n: usize) -> Self {
        let mut height = vec![-1; n];
        height[BASE] = 0;
        LprState {
            parent: vec![None; n],
            height,
            level: 0,
        }
    }

    pub fn is_attached(&self, v: NodeId) -> bool {
        self.height[v] >= 0
    }

    pub fn attached_count(&self) -> usize {
        self.height.iter().filter(|&&h| h >= 0).count()
    }
}

/// Result of [`lpr`] with a per-level trace.
#[derive(Debug, Clone)]
pub struct LprOutcome {
    pub tree: RoutedTree,
    /// One line per LP solve: level, attachments and LP objective.
    pub trace: Vec<String>,
    pub lp_solves: usize,
}

/// LP rounding. Each level solves the relaxation of the flow model with the
/// arcs fixed so far pinned to 1, then lets every frontier node adopt its
/// unattached neighbours in decreasing order of their arc values, up to its
/// child capacity.
pub fn lpr(g: &NetworkGraph, c: &DelayConstraints) -> Result<LprOutcome> {
    let n = g.num_nodes();
    let (mut model, layout) = build_ilp_p3(g, c, None)?;
    let arc_index = |from: NodeId, to: NodeId| -> usize {
        layout.out_arcs[from]
            .iter()
            .copied()
            .find(|&a| layout.arcs[a].to == to)
            .expect("arc exists")
    };
    let mut st = LprState::new(n);
    let mut used = vec![0usize; n];
    let mut trace = Vec::new();
    let mut lp_solves = 0;
    while st.attached_count() < n {
        st.level += 1;
        let lp = solve_lp(&model);
        lp_solves += 1;
        if lp.status != Status::Optimal {
            return Err(Error::Infeasible(format!("LP relaxation {:?} at level {}", lp.status, st.level)));
        }
        let x_of = |from: NodeId, to: NodeId| -> f64 { quantize(lp.values[layout.x[arc_index(from, to)]]) };
        let mut attached_now = Vec::new();
        let frontier: Vec<NodeId> = (0..n).filter(|&v| st.height[v] == st.level - 1).collect();
        for &v in &frontier {
            let room = c.child_capacity(v) - used[v];
            let mut cands: Vec<(f64, NodeId)> = g
                .neighbors(v)
                .iter()
                .filter(|&&(u, _)| !st.is_attached(u))
                .map(|&(u, _)| (x_of(u, v), u))
                .collect();
            cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            for &(_, u) in cands.iter().take(room) {
                st.parent[u] = Some(v);
                st.height[u] = st.level;
                used[v] += 1;
                attached_now.push((u, v));
            }
        }
        if attached_now.is_empty() {
            // nothing grew from the frontier: take the single best arc into
            // any attached node that still has room
            let mut best: Option<(f64, NodeId, NodeId)> = None;
            for v in (0..n).filter(|&v| st.is_attached(v) && used[v] < c.child_capacity(v)) {
                for &(u, _) in g.neighbors(v).iter().filter(|&&(u, _)| !st.is_attached(u)) {
                    let val = x_of(u, v);
                    if val > 0.0 && best.map_or(true, |(b, bu, bv)| val > b || (val == b && (u, v) < (bu, bv))) {
                        best = Some((val, u, v));
                    }
                }
            }
            let (_, u, v) = best.ok_or(Error::Stalled {
                attached: st.attached_count(),
            })?;
            st.parent[u] = Some(v);
            st.height[u] = st.height[v] + 1;
            used[v] += 1;
            attached_now.push((u, v));
        }
        for &(u, v) in &attached_now {
            let a = arc_index(u, v);
            model.set_bounds(layout.x[a], 1.0, 1.0);
        }
        let mut line = format!("level {} lp {} attached", st.level, lp.objective_value);
        for (u, v) in &attached_now {
            write!(line, " {u}->{v}").unwrap();
        }
        trace.push(line);
    }
    Ok(LprOutcome {
        tree: RoutedTree::from_parents(g, st.parent)?,
        trace,
        lp_solves,
    })
}

fn quantize(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// Attachment state of the modified Dijkstra construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaaState {
    pub attached: Vec<bool>,
    /// Tentative heights, `None` standing for infinity.
    pub height: Vec<Option<usize>>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DaaOutcome {
    pub tree: RoutedTree,
    /// Two messages per attachment between neighbouring nodes.
    pub message_estimate: usize,
}

/// Modified Dijkstra: repeatedly attach the unattached node closest to the
/// base through an attached node that still has spare child capacity.
pub fn daa(g: &NetworkGraph, c: &DelayConstraints) -> Result<DaaOutcome> {
    let n = g.num_nodes();
    let mut st = DaaState {
        attached: vec![false; n],
        height: vec![None; n],
        children: vec![0; n],
    };
    st.attached[BASE] = true;
    st.height[BASE] = Some(0);
    let mut parent = vec![None; n];
    for _ in 1..n {
        for v in 0..n {
            if !st.attached[v] {
                st.height[v] = None;
            }
        }
        // tentative heights through attached nodes with room
        let mut best_parent: Vec<Option<NodeId>> = vec![None; n];
        for v in (0..n).filter(|&v| st.attached[v] && st.children[v] < c.child_capacity(v)) {
            let hv = st.height[v].expect("attached nodes have heights");
            for &(u, _) in g.neighbors(v).iter().filter(|&&(u, _)| !st.attached[u]) {
                let better = match (st.height[u], best_parent[u]) {
                    (None, _) => true,
                    (Some(hu), Some(p)) => hv + 1 < hu || (hv + 1 == hu && v < p),
                    (Some(_), None) => unreachable!(),
                };
                if better {
                    st.height[u] = Some(hv + 1);
                    best_parent[u] = Some(v);
                }
            }
        }
        let pick = (0..n)
            .filter(|&u| !st.attached[u])
            .filter_map(|u| st.height[u].map(|h| (h, u)))
            .min();
        let Some((h, u)) = pick else {
            let stuck = (0..n).find(|&u| !st.attached[u]).expect("some node is unattached");
            return Err(Error::Unattachable(stuck));
        };
        let p = best_parent[u].expect("tentative height has a parent");
        st.attached[u] = true;
        st.height[u] = Some(h);
        st.children[p] += 1;
        parent[u] = Some(p);
    }
    Ok(DaaOutcome {
        tree: RoutedTree::from_parents(g, parent)?,
        message_estimate: 2 * (n - 1),
    })
}

/// Every node that could still take a child has no neighbour more than one
/// level below it.
pub fn check_nonfull_frontier_property(t: &RoutedTree, g: &NetworkGraph, c: &DelayConstraints) -> bool {
    (0..g.num_nodes())
        .filter(|&v| t.children_count(v) < c.child_capacity(v))
        .all(|v| g.neighbors(v).iter().all(|&(u, _)| t.depth(u) <= t.depth(v) + 1))
}

/// Tree height relative to the unconstrained DCT's.
pub fn height_ratio(t: &RoutedTree, g: &NetworkGraph) -> f64 {
    let dct = build_dct(g).height().max(1);
    t.height() as f64 / dct as f64
}

/// Rearranges `t` so that every non-leaf node has at least `n_a - 1`
/// children while staying within the child capacities.
///
/// An undersized non-leaf node other than the base hands its children to
/// other non-leaf nodes, preferring the base and those already at the minimum;
/// failing that, and always for the base, it adopts neighbours, taking
/// first those whose current parents can spare them.
pub fn repair_accuracy(t: &RoutedTree, g: &NetworkGraph, c: &DelayConstraints) -> Result<RoutedTree> {
    let Some(n_a) = c.n_a else {
        return Ok(t.clone());
    };
    let need = n_a.saturating_sub(1);
    let mut tree = t.clone();
    let mut rounds = 0;
    loop {
        let undersized = (0..g.num_nodes()).find(|&v| {
            let k = tree.children_count(v);
            k > 0 && k < need
        });
        let Some(v) = undersized else {
            return Ok(tree);
        };
        rounds += 1;
        if rounds > 4 * g.num_nodes() * g.num_nodes() {
            return Err(Error::Infeasible("accuracy repair does not converge".into()));
        }
        if v != BASE {
            if let Some(next) = detach_children(&tree, g, c, v, need) {
                tree = next;
                continue;
            }
        }
        match adopt_neighbours(&tree, g, c, v, need) {
            Some(next) => tree = next,
            None => {
                return Err(Error::Infeasible(format!(
                    "node {v} cannot reach {need} children under the capacities"
                )))
            }
        }
    }
}

fn detach_children(t: &RoutedTree, g: &NetworkGraph, c: &DelayConstraints, v: NodeId, need: usize) -> Option<RoutedTree> {
    let mut parent = t.parents().to_vec();
    let mut kids = vec![0usize; g.num_nodes()];
    for &p in parent.iter().flatten() {
        kids[p] += 1;
    }
    for child in t.children(v) {
        let target = g
            .neighbors(child)
            .iter()
            .map(|&(q, _)| q)
            .filter(|&q| q != v && kids[q] < c.child_capacity(q))
            .filter(|&q| kids[q] > 0 || q == BASE)
            .filter(|&q| !is_ancestor_in(&parent, child, q))
            .min_by_key(|&q| (kids[q] < need && q != BASE, depth_in(&parent, q), q))?;
        parent[child] = Some(target);
        kids[v] -= 1;
        kids[target] += 1;
    }
    RoutedTree::from_parents(g, parent).ok()
}

fn adopt_neighbours(t: &RoutedTree, g: &NetworkGraph, c: &DelayConstraints, v: NodeId, need: usize) -> Option<RoutedTree> {
    let mut parent = t.parents().to_vec();
    let mut kids = vec![0usize; g.num_nodes()];
    for &p in parent.iter().flatten() {
        kids[p] += 1;
    }
    if c.child_capacity(v) < need {
        return None;
    }
    let mut cands: Vec<NodeId> = g.neighbors(v).iter().map(|&(u, _)| u).collect();
    cands.sort_by_key(|&u| (depth_in(&parent, u), u));
    for strict in [true, false] {
        for &u in &cands {
            if kids[v] >= need {
                break;
            }
            let Some(p) = parent[u] else { continue };
            if p == v || is_ancestor_in(&parent, u, v) {
                continue;
            }
            let left = kids[p] - 1;
            if strict && left != 0 && left < need {
                continue;
            }
            parent[u] = Some(v);
            kids[p] -= 1;
            kids[v] += 1;
        }
    }
    (kids[v] >= need).then(|| RoutedTree::from_parents(g, parent).ok()).flatten()
}

fn is_ancestor_in(parent: &[Option<NodeId>], a: NodeId, v: NodeId) -> bool {
    let mut cur = Some(v);
    let mut steps = 0;
    while let Some(u) = cur {
        if u == a {
            return true;
        }
        steps += 1;
        if steps > parent.len() {
            return true;
        }
        cur = parent[u];
    }
    false
}

fn depth_in(parent: &[Option<NodeId>], v: NodeId) -> usize {
    let mut d = 0;
    let mut cur = v;
    while let Some(p) = parent[cur] {
        d += 1;
        cur = p;
    }
    d
}
