//! Routed collection trees: DCT, MDCT and DDCT builders plus metrics.

use std::fmt::Write as _;
use std::time::Duration;

use shmnet_lp::{solve_milp_with, MilpModel, MilpOptions, Relation, Sense, Status};

use crate::error::{Error, Result};
use crate::milp_models::{build_ilp_p3, build_ilp_p3_layered, extract_tree_p3, extract_tree_p3_layered};
use crate::netmodel::{shortest_paths, DelayConstraints, NetworkGraph, NodeId, ShortestPathTable, BASE, WEIGHT_TOL};

/// Spanning tree rooted at the base station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutedTree {
    parent: Vec<Option<NodeId>>,
    depth: Vec<usize>,
    children: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeMetrics {
    pub height: usize,
    pub sum_heights: usize,
    pub non_leaf_count: usize,
    pub max_children: usize,
}

impl RoutedTree {
    /// Validates a parent map against `g`: node 0 is the only root, every
    /// tree edge is a graph edge, and all nodes reach the root.
    pub fn from_parents(g: &NetworkGraph, parent: Vec<Option<NodeId>>) -> Result<Self> {
        let n = g.num_nodes();
        if parent.len() != n {
            return Err(Error::InvalidTree(format!("{} parents for {n} nodes", parent.len())));
        }
        if parent[BASE].is_some() {
            return Err(Error::InvalidTree("the base station has a parent".into()));
        }
        let mut children = vec![0; n];
        for (v, p) in parent.iter().enumerate().skip(1) {
            let p = p.ok_or_else(|| Error::InvalidTree(format!("node {v} has no parent")))?;
            if p >= n || !g.has_edge(v, p) {
                return Err(Error::InvalidTree(format!("{v}-{p} is not an edge")));
            }
            children[p] += 1;
        }
        const UNSET: usize = usize::MAX;
        let mut depth = vec![UNSET; n];
        depth[BASE] = 0;
        for start in 0..n {
            let mut chain = Vec::new();
            let mut v = start;
            while depth[v] == UNSET {
                if chain.len() > n {
                    return Err(Error::InvalidTree(format!("cycle through node {start}")));
                }
                chain.push(v);
                v = parent[v].expect("non-root has a parent");
            }
            let mut d = depth[v];
            for &u in chain.iter().rev() {
                d += 1;
                depth[u] = d;
            }
        }
        Ok(RoutedTree {
            parent,
            depth,
            children,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    /// Hop count `d_T(v)` from the base.
    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    pub fn children_count(&self, v: NodeId) -> usize {
        self.children[v]
    }

    pub fn children(&self, v: NodeId) -> Vec<NodeId> {
        (0..self.num_nodes()).filter(|&u| self.parent[u] == Some(v)).collect()
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v] == 0
    }

    /// Nodes with at least one child, in id order.
    pub fn non_leaf_nodes(&self) -> Vec<NodeId> {
        (0..self.num_nodes()).filter(|&v| self.children[v] > 0).collect()
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Sum of edge weights on the tree path from `v` to the base.
    pub fn weighted_depth(&self, g: &NetworkGraph, v: NodeId) -> f64 {
        let mut total = 0.0;
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            total += g.weight(cur, p).expect("tree edge");
            cur = p;
        }
        total
    }

    /// Number of nodes in the subtree rooted at each node.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut order: Vec<NodeId> = (0..self.num_nodes()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.depth[v]));
        let mut size = vec![1; self.num_nodes()];
        for v in order {
            if let Some(p) = self.parent[v] {
                size[p] += size[v];
            }
        }
        size
    }

    /// Whether `a` lies on the path from `v` to the root (inclusive).
    pub fn is_ancestor(&self, a: NodeId, v: NodeId) -> bool {
        let mut cur = Some(v);
        while let Some(u) = cur {
            if u == a {
                return true;
            }
            cur = self.parent[u];
        }
        false
    }

    pub fn metrics(&self) -> TreeMetrics {
        TreeMetrics {
            height: self.height(),
            sum_heights: self.depth.iter().sum(),
            non_leaf_count: self.children.iter().filter(|&&c| c > 0).count(),
            max_children: self.children.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn respects_capacity(&self, c: &DelayConstraints) -> bool {
        (0..self.num_nodes()).all(|v| self.children[v] <= c.child_capacity(v))
    }

    /// `parent v p` lines followed by a `# height v h` block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                writeln!(out, "parent {v} {p}").unwrap();
            }
        }
        for (v, d) in self.depth.iter().enumerate() {
            writeln!(out, "# height {v} {d}").unwrap();
        }
        out
    }

    pub fn from_text(g: &NetworkGraph, text: &str) -> Result<Self> {
        let mut parent = vec![None; g.num_nodes()];
        for (idx, line) in text.lines().enumerate() {
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let bad = || Error::InvalidTree(format!("line {}: `{body}`", idx + 1));
            let f: Vec<&str> = body.split_whitespace().collect();
            match f.as_slice() {
                ["parent", v, p] => {
                    let v: usize = v.parse().map_err(|_| bad())?;
                    let p: usize = p.parse().map_err(|_| bad())?;
                    *parent.get_mut(v).ok_or_else(bad)? = Some(p);
                }
                _ => return Err(bad()),
            }
        }
        Self::from_parents(g, parent)
    }
}

pub fn tree_metrics(t: &RoutedTree) -> TreeMetrics {
    t.metrics()
}

/// Data collection tree: every node routes to the base along its shortest
/// path, with the lowest-id next hop on ties.
pub fn build_dct(g: &NetworkGraph) -> RoutedTree {
    dct_from_paths(g, &shortest_paths(g))
}

pub fn dct_from_paths(g: &NetworkGraph, spt: &ShortestPathTable) -> RoutedTree {
    let parent = (0..g.num_nodes())
        .map(|v| (v != BASE).then(|| spt.next_hop(v, BASE)))
        .collect();
    RoutedTree::from_parents(g, parent).expect("next hops form a tree")
}

/// For each node, the neighbours that may serve as its parent in some DCT,
/// in id order.
pub fn dct_parent_candidates(g: &NetworkGraph, spt: &ShortestPathTable) -> Vec<Vec<NodeId>> {
    (0..g.num_nodes())
        .map(|v| {
            if v == BASE {
                return Vec::new();
            }
            g.neighbors(v)
                .iter()
                .filter(|&&(u, w)| {
                    spt.hops(u, BASE) + 1 == spt.hops(v, BASE)
                        && (spt.dist(u, BASE) + w - spt.dist(v, BASE)).abs() <= WEIGHT_TOL
                })
                .map(|&(u, _)| u)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdctMode {
    Exact { budget: Duration },
    Greedy,
}

/// A DCT with as few non-leaf nodes as the chosen mode achieves.
pub fn build_mdct(g: &NetworkGraph, mode: MdctMode) -> Result<RoutedTree> {
    let spt = shortest_paths(g);
    let cands = dct_parent_candidates(g, &spt);
    let dct = dct_from_paths(g, &spt);
    let greedy = greedy_cover(g, &cands);
    let best_heuristic = if greedy.metrics().non_leaf_count <= dct.metrics().non_leaf_count {
        greedy
    } else {
        dct
    };
    match mode {
        MdctMode::Greedy => Ok(best_heuristic),
        MdctMode::Exact { budget } => exact_mdct(g, &cands, &best_heuristic, budget),
    }
}

fn greedy_cover(g: &NetworkGraph, cands: &[Vec<NodeId>]) -> RoutedTree {
    let n = g.num_nodes();
    let mut covers: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (v, ps) in cands.iter().enumerate() {
        for &p in ps {
            covers[p].push(v);
        }
    }
    let mut covered = vec![false; n];
    covered[BASE] = true;
    let mut chosen = vec![false; n];
    loop {
        let gain = |u: NodeId| covers[u].iter().filter(|&&v| !covered[v]).count();
        let best = (0..n).filter(|&u| !chosen[u]).max_by_key(|&u| (gain(u), std::cmp::Reverse(u)));
        match best {
            Some(u) if gain(u) > 0 => {
                chosen[u] = true;
                for &v in &covers[u] {
                    covered[v] = true;
                }
            }
            _ => break,
        }
    }
    // drop parents made redundant by later picks
    for u in (0..n).rev() {
        if chosen[u] {
            chosen[u] = false;
            let still = covers[u].iter().all(|&v| cands[v].iter().any(|&p| chosen[p]));
            if !still {
                chosen[u] = true;
            }
        }
    }
    let parent = (0..n)
        .map(|v| {
            (v != BASE).then(|| *cands[v].iter().find(|&&p| chosen[p]).expect("cover is complete"))
        })
        .collect();
    RoutedTree::from_parents(g, parent).expect("candidates are graph edges")
}

fn exact_mdct(g: &NetworkGraph, cands: &[Vec<NodeId>], start: &RoutedTree, budget: Duration) -> Result<RoutedTree> {
    let n = g.num_nodes();
    let mut m = MilpModel::with_sense(Sense::Minimize);
    let y: Vec<_> = (0..n).map(|u| m.add_binary(format!("y_{u}"), 1.0)).collect();
    let mut x = Vec::new();
    for (v, ps) in cands.iter().enumerate() {
        let mut row = Vec::new();
        for &u in ps {
            let var = m.add_binary(format!("x_{u}_{v}"), 0.0);
            m.add_constraint(format!("link_{u}_{v}"), [(var, 1.0), (y[u], -1.0)], Relation::Le, 0.0);
            x.push((u, v, var));
            row.push((var, 1.0));
        }
        if v != BASE {
            m.add_constraint(format!("parent_{v}"), row, Relation::Eq, 1.0);
        }
    }
    let mut warm = vec![0.0; m.num_vars()];
    for &(u, v, var) in &x {
        if start.parent(v) == Some(u) {
            warm[var] = 1.0;
            warm[y[u]] = 1.0;
        }
    }
    let sol = solve_milp_with(
        &m,
        &MilpOptions {
            time_budget: Some(budget),
            incumbent: Some(warm),
            ..MilpOptions::default()
        },
    )?;
    if sol.status != Status::Optimal {
        return Err(Error::InconsistentSolution("MDCT model has no solution".into()));
    }
    let mut parent = vec![None; n];
    for &(u, v, var) in &x {
        if sol.is_set(var) {
            parent[v] = Some(u);
        }
    }
    RoutedTree::from_parents(g, parent)
}

/// Degree-constrained collection tree minimizing the sum of weighted depths.
///
/// Unit-weight graphs go through the hop-indexed model, warm-started from
/// the best of DAA and LPR; other graphs use the flow model.
pub fn build_ddct_ilp(g: &NetworkGraph, c: &DelayConstraints, budget: Duration) -> Result<RoutedTree> {
    if g.is_unit_weight() {
        build_ddct_layered(g, c, budget)
    } else {
        build_ddct_flow(g, c, budget)
    }
}

/// Exact DDCT through the single-commodity flow model.
pub fn build_ddct_flow(g: &NetworkGraph, c: &DelayConstraints, budget: Duration) -> Result<RoutedTree> {
    let (model, layout) = build_ilp_p3(g, c, c.n_a)?;
    let sol = solve_milp_with(
        &model,
        &MilpOptions {
            time_budget: Some(budget),
            ..MilpOptions::default()
        },
    )?;
    match sol.status {
        Status::Optimal => extract_tree_p3(&sol, &layout, g),
        _ => Err(Error::Infeasible("no degree-feasible spanning tree".into())),
    }
}

/// Satisfies the capacities and, when `c.n_a` is set, gives every non-leaf
/// node at least `n_a - 1` children.
pub fn meets_constraints(t: &RoutedTree, c: &DelayConstraints) -> bool {
    let min_kids = c.n_a.map_or(0, |a| a.saturating_sub(1));
    t.respects_capacity(c) && (0..t.num_nodes()).all(|v| t.is_leaf(v) || t.children_count(v) >= min_kids)
}

/// Best feasible tree found by the heuristics, if any.
pub fn heuristic_ddct(g: &NetworkGraph, c: &DelayConstraints) -> Option<RoutedTree> {
    let mut found = Vec::new();
    if let Ok(o) = crate::approx::daa(g, c) {
        found.push(o.tree);
    }
    if let Ok(o) = crate::approx::lpr(g, c) {
        found.push(o.tree);
    }
    if c.n_a.is_some() {
        found = found
            .iter()
            .filter_map(|t| crate::approx::repair_accuracy(t, g, c).ok())
            .collect();
    }
    found
        .into_iter()
        .filter(|t| meets_constraints(t, c))
        .min_by_key(|t| t.metrics().sum_heights)
}

/// Exact DDCT on a unit-weight graph through the hop-indexed model.
pub fn build_ddct_layered(g: &NetworkGraph, c: &DelayConstraints, budget: Duration) -> Result<RoutedTree> {
    let n = g.num_nodes();
    c.validate(n)?;
    if n == 1 {
        return RoutedTree::from_parents(g, vec![None]);
    }
    let spt = shortest_paths(g);
    let floor: usize = (0..n).map(|v| spt.hops(v, BASE)).sum();
    let start = heuristic_ddct(g, c);
    let slack = start.as_ref().map_or(n - 1, |t| t.metrics().sum_heights - floor);
    let (model, layout) = build_ilp_p3_layered(g, c, c.n_a, slack)?;
    let incumbent = start.as_ref().and_then(|t| layout.encode_tree(t, model.num_vars()));
    let sol = solve_milp_with(
        &model,
        &MilpOptions {
            time_budget: Some(budget),
            incumbent,
            ..MilpOptions::default()
        },
    )?;
    match sol.status {
        Status::Optimal => extract_tree_p3_layered(&sol, &layout, g),
        _ => Err(Error::Infeasible("no degree-feasible spanning tree".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parents_of(t: &RoutedTree) -> Vec<Option<NodeId>> {
        t.parents().to_vec()
    }

    #[test]
    fn dct_on_chain_and_complete() {
        let t = build_dct(&NetworkGraph::path(3));
        assert_eq!(parents_of(&t), vec![None, Some(0), Some(1)]);
        assert_eq!((0..3).map(|v| t.depth(v)).collect::<Vec<_>>(), vec![0, 1, 2]);
        let t = build_dct(&NetworkGraph::complete(4));
        assert!((1..4).all(|v| t.parent(v) == Some(0) && t.depth(v) == 1));
    }

    #[test]
    fn metrics_of_chain_and_star() {
        let m = build_dct(&NetworkGraph::path(4)).metrics();
        assert_eq!(
            m,
            TreeMetrics {
                height: 3,
                sum_heights: 6,
                non_leaf_count: 3,
                max_children: 1
            }
        );
        let m = build_dct(&NetworkGraph::star(5)).metrics();
        assert_eq!(
            m,
            TreeMetrics {
                height: 1,
                sum_heights: 4,
                non_leaf_count: 1,
                max_children: 4
            }
        );
    }

    #[test]
    fn rejects_bad_parent_maps() {
        let g = NetworkGraph::complete(3);
        assert!(RoutedTree::from_parents(&g, vec![Some(1), Some(0), Some(0)]).is_err());
        assert!(RoutedTree::from_parents(&g, vec![None, Some(2), Some(1)]).is_err());
        let chain = NetworkGraph::path(3);
        assert!(RoutedTree::from_parents(&chain, vec![None, Some(0), Some(0)]).is_err());
    }

    /// Two layer-1 nodes (1, 2) that each reach all layer-2 nodes (3, 4, 5);
    /// the lowest-id DCT spreads children over both.
    fn fig3_graph() -> NetworkGraph {
        let mut edges = vec![(0, 1, 1.0), (0, 2, 1.0), (2, 5, 1.0), (2, 4, 1.0), (2, 3, 1.0)];
        edges.extend([(1, 3, 1.0), (1, 4, 1.0), (1, 5, 1.0)]);
        NetworkGraph::new(6, edges).unwrap()
    }

    #[test]
    fn mdct_beats_a_worst_case_dct() {
        let g = fig3_graph();
        let dct = build_dct(&g);
        let worst = RoutedTree::from_parents(&g, vec![None, Some(0), Some(0), Some(1), Some(1), Some(2)]).unwrap();
        assert_eq!(worst.metrics().non_leaf_count, 3);
        let exact = build_mdct(&g, MdctMode::Exact { budget: Duration::from_secs(10) }).unwrap();
        assert_eq!(exact.metrics().non_leaf_count, 2);
        assert!(exact.metrics().non_leaf_count < worst.metrics().non_leaf_count);
        for v in 0..6 {
            assert_eq!(exact.depth(v), dct.depth(v));
        }
    }

    #[test]
    fn mdct_of_star_is_star() {
        let g = NetworkGraph::star(6);
        for mode in [MdctMode::Greedy, MdctMode::Exact { budget: Duration::from_secs(5) }] {
            let t = build_mdct(&g, mode).unwrap();
            assert_eq!(t.metrics().non_leaf_count, 1);
        }
    }

    #[test]
    fn ddct_examples() {
        let star = NetworkGraph::star(4);
        let t = build_ddct_ilp(&star, &DelayConstraints::uniform(4, 4), Duration::from_secs(10)).unwrap();
        assert_eq!(t.metrics().sum_heights, 3);
        let k4 = NetworkGraph::complete(4);
        let t = build_ddct_ilp(&k4, &DelayConstraints::uniform(4, 2), Duration::from_secs(10)).unwrap();
        assert_eq!(t.metrics().sum_heights, 6);
        assert_eq!(t.metrics().max_children, 1);
    }

    #[test]
    fn ddct_reports_infeasible_capacity() {
        let star = NetworkGraph::star(4);
        let err = build_ddct_ilp(&star, &DelayConstraints::uniform(4, 3), Duration::from_secs(10)).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn text_round_trip() {
        let g = fig3_graph();
        let t = build_dct(&g);
        let text = t.to_text();
        assert!(text.starts_with("parent 1 0\nparent 2 0\n"));
        assert!(text.contains("# height 5 2\n"));
        assert_eq!(RoutedTree::from_text(&g, &text).unwrap(), t);
    }

    #[test]
    fn subtree_sizes_and_ancestry() {
        let t = build_dct(&NetworkGraph::path(4));
        assert_eq!(t.subtree_sizes(), vec![4, 3, 2, 1]);
        assert!(t.is_ancestor(1, 3));
        assert!(!t.is_ancestor(3, 1));
    }
}
