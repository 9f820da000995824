//! Integer programs for the general planning problem (`ILP_P1`) and for
//! degree-constrained collection trees (`ILP_P3`).

use shmnet_lp::{MilpModel, MilpSolution, Relation, Sense, Status, VarId};

use crate::error::{Error, Result};
use crate::netmodel::{DelayConstraints, EnergyParams, NetworkGraph, NodeId, ShortestPathTable, BASE};
use crate::plans::{plan_energy, validate_plan, CommPlan};
use crate::trees::RoutedTree;

/// Default node cap for `ILP_P1`; the variable count grows as `|V|^4`.
pub const P1_MAX_NODES: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct P1Options {
    /// Add the lower halves of the product linearizations as well.
    pub strict_products: bool,
    pub max_nodes: usize,
}

impl Default for P1Options {
    fn default() -> Self {
        P1Options {
            strict_products: false,
            max_nodes: P1_MAX_NODES,
        }
    }
}

/// Variable index maps for `ILP_P1`.
#[derive(Debug, Clone)]
pub struct IlpP1Layout {
    n: usize,
    x_base: usize,
    p_base: usize,
    c_base: usize,
    t_base: usize,
    num_vars: usize,
    spt: ShortestPathTable,
    energy: EnergyParams,
    constraints: DelayConstraints,
}

impl IlpP1Layout {
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// `x_ij`: node `i`'s FFT is evaluated at `j`.
    pub fn x(&self, i: NodeId, j: NodeId) -> VarId {
        self.x_base + i * self.n + j
    }

    /// `p_ijk`: node `k`'s FFT is evaluated at both `i` and `j`.
    pub fn p(&self, i: NodeId, j: NodeId, k: NodeId) -> VarId {
        self.p_base + (i * self.n + j) * self.n + k
    }

    /// `c_ijl`: heads `i` and `j` are linked through at most `l` intermediate
    /// clusters, `0 <= l < |V|`.
    pub fn c(&self, i: NodeId, j: NodeId, level: usize) -> VarId {
        debug_assert!(level < self.n);
        self.c_base + (i * self.n + j) * self.n + level
    }

    /// `t_ijkl`, `0 < l < |V|`: `i` and `j` both reach `k` at level `l - 1`.
    pub fn t(&self, i: NodeId, j: NodeId, k: NodeId, level: usize) -> VarId {
        debug_assert!(level >= 1 && level < self.n);
        self.t_base + ((i * self.n + j) * self.n + k) * (self.n - 1) + level - 1
    }

    /// A full variable assignment encoding `plan`, with every auxiliary
    /// variable at its largest consistent value.
    pub fn encode_plan(&self, plan: &CommPlan) -> Vec<f64> {
        let n = self.n;
        let mut v = vec![0.0; self.num_vars];
        for (i, j) in plan.pairs() {
            v[self.x(i, j)] = 1.0;
        }
        let x = |a: NodeId, b: NodeId| plan.is_set(a, b);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if x(k, i) && x(k, j) {
                        v[self.p(i, j, k)] = 1.0;
                    }
                }
            }
        }
        let mut reach = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                reach[i][j] = i != j && (0..n).any(|k| x(k, i) && x(k, j));
                v[self.c(i, j, 0)] = f64::from(u8::from(reach[i][j]));
            }
        }
        for level in 1..n {
            let prev = reach.clone();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if prev[i][k] && prev[j][k] {
                            v[self.t(i, j, k, level)] = 1.0;
                        }
                    }
                    reach[i][j] = i != j && (prev[i][j] || (0..n).any(|k| prev[i][k] && prev[j][k]));
                    v[self.c(i, j, level)] = f64::from(u8::from(reach[i][j]));
                }
            }
        }
        v
    }
}

/// Builds `ILP_P1`. Optimal solutions are minimum-energy plans under
/// per-evaluation accounting.
pub fn build_ilp_p1(
    g: &NetworkGraph,
    spt: &ShortestPathTable,
    e: &EnergyParams,
    c: &DelayConstraints,
    opts: P1Options,
) -> Result<(MilpModel, IlpP1Layout)> {
    let n = g.num_nodes();
    if n > opts.max_nodes {
        return Err(Error::InstanceTooLarge(format!(
            "ILP_P1 allows at most {} nodes, got {n}",
            opts.max_nodes
        )));
    }
    c.validate(n)?;
    let mut m = MilpModel::with_sense(Sense::Minimize);
    let x_base = m.num_vars();
    for i in 0..n {
        for j in 0..n {
            let cost = e.e_b() * (e.fft_bytes * spt.dist(i, j) + e.eig_bytes * spt.dist(j, BASE));
            let v = m.add_binary(format!("x[{i},{j}]"), cost);
            m.set_priority(v, 1);
        }
    }
    let p_base = m.num_vars();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                m.add_binary(format!("p[{i},{j},{k}]"), 0.0);
            }
        }
    }
    let c_base = m.num_vars();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let v = m.add_binary(format!("c[{i},{j},{l}]"), 0.0);
                if i == j {
                    m.set_bounds(v, 0.0, 0.0);
                }
            }
        }
    }
    let t_base = m.num_vars();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 1..n {
                    m.add_binary(format!("t[{i},{j},{k},{l}]"), 0.0);
                }
            }
        }
    }
    let layout = IlpP1Layout {
        n,
        x_base,
        p_base,
        c_base,
        t_base,
        num_vars: m.num_vars(),
        spt: spt.clone(),
        energy: *e,
        constraints: c.clone(),
    };
    let (x, p, cc, t) = (
        |i, j| layout.x(i, j),
        |i, j, k| layout.p(i, j, k),
        |i, j, l| layout.c(i, j, l),
        |i, j, k, l| layout.t(i, j, k, l),
    );
    let nf = n as f64;

    for i in 0..n {
        let others: Vec<(VarId, f64)> = (0..n).filter(|&j| j != i).map(|j| (x(j, i), 1.0)).collect();
        let mut lo = others.clone();
        lo.push((x(i, i), -nf));
        m.add_constraint(format!("head_lo[{i}]"), lo, Relation::Le, 0.0);
        let mut hi: Vec<_> = others.iter().map(|&(v, a)| (v, -a)).collect();
        hi.push((x(i, i), 1.0));
        m.add_constraint(format!("head_hi[{i}]"), hi, Relation::Le, 0.0);
        m.add_constraint(
            format!("cover[{i}]"),
            (0..n).map(|j| (x(i, j), 1.0)),
            Relation::Ge,
            1.0,
        );
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                m.add_constraint(
                    format!("share[{i},{j},{k}]"),
                    [(p(i, j, k), 2.0), (x(k, i), -1.0), (x(k, j), -1.0)],
                    Relation::Le,
                    0.0,
                );
                if opts.strict_products {
                    m.add_constraint(
                        format!("share_lo[{i},{j},{k}]"),
                        [(p(i, j, k), 1.0), (x(k, i), -1.0), (x(k, j), -1.0)],
                        Relation::Ge,
                        -1.0,
                    );
                }
            }
            let mut base = vec![(cc(i, j, 0), 1.0)];
            base.extend((0..n).map(|k| (p(i, j, k), -1.0)));
            m.add_constraint(format!("overlap[{i},{j}]"), base, Relation::Le, 0.0);
            if i != j {
                m.add_constraint(
                    format!("combinable[{i},{j}]"),
                    [(cc(i, j, n - 1), 1.0), (x(i, i), -1.0), (x(j, j), -1.0)],
                    Relation::Ge,
                    -1.0,
                );
            }
            for l in 1..n {
                for k in 0..n {
                    m.add_constraint(
                        format!("via[{i},{j},{k},{l}]"),
                        [(t(i, j, k, l), 2.0), (cc(i, k, l - 1), -1.0), (cc(j, k, l - 1), -1.0)],
                        Relation::Le,
                        0.0,
                    );
                    if opts.strict_products {
                        m.add_constraint(
                            format!("via_lo[{i},{j},{k},{l}]"),
                            [(t(i, j, k, l), 1.0), (cc(i, k, l - 1), -1.0), (cc(j, k, l - 1), -1.0)],
                            Relation::Ge,
                            -1.0,
                        );
                    }
                }
                let mut row = vec![(cc(i, j, l), 1.0), (cc(i, j, l - 1), -1.0)];
                row.extend((0..n).map(|k| (t(i, j, k, l), -1.0)));
                m.add_constraint(format!("chain[{i},{j},{l}]"), row, Relation::Le, 0.0);
            }
            if opts.strict_products && i != j {
                for k in 0..n {
                    m.add_constraint(
                        format!("overlap_lo[{i},{j},{k}]"),
                        [(cc(i, j, 0), 1.0), (p(i, j, k), -1.0)],
                        Relation::Ge,
                        0.0,
                    );
                }
                for l in 1..n {
                    m.add_constraint(
                        format!("chain_keep[{i},{j},{l}]"),
                        [(cc(i, j, l), 1.0), (cc(i, j, l - 1), -1.0)],
                        Relation::Ge,
                        0.0,
                    );
                    for k in 0..n {
                        m.add_constraint(
                            format!("chain_lo[{i},{j},{k},{l}]"),
                            [(cc(i, j, l), 1.0), (t(i, j, k, l), -1.0)],
                            Relation::Ge,
                            0.0,
                        );
                    }
                }
            }
        }
    }
    for j in 0..n {
        m.add_constraint(
            format!("delay[{j}]"),
            (0..n).map(|i| (x(i, j), 1.0)),
            Relation::Le,
            c.n[j] as f64,
        );
        if let Some(n_a) = c.n_a {
            let mut row: Vec<_> = (0..n).map(|i| (x(i, j), 1.0)).collect();
            row.push((x(j, j), -(n_a as f64)));
            m.add_constraint(format!("accuracy[{j}]"), row, Relation::Ge, 0.0);
        }
    }
    Ok((m, layout))
}

/// Reads the plan out of an optimal `ILP_P1` solution and checks that it is
/// valid and that its energy matches the objective.
pub fn extract_plan_p1(sol: &MilpSolution, layout: &IlpP1Layout) -> Result<CommPlan> {
    if sol.status != Status::Optimal {
        return Err(Error::InconsistentSolution(format!("status {:?}", sol.status)));
    }
    let n = layout.n;
    let mut plan = CommPlan::empty(n);
    for i in 0..n {
        for j in 0..n {
            if sol.is_set(layout.x(i, j)) {
                plan.set(i, j);
            }
        }
    }
    let violations = validate_plan(&plan, &layout.constraints);
    if !violations.is_empty() {
        return Err(Error::InconsistentSolution(format!("plan violates {violations:?}")));
    }
    let energy = plan_energy(&plan, &layout.spt, &layout.energy)?.total;
    if (energy - sol.objective_value).abs() > 1e-6 * sol.objective_value.abs().max(1.0) {
        return Err(Error::InconsistentSolution(format!(
            "plan energy {energy} differs from objective {}",
            sol.objective_value
        )));
    }
    Ok(plan)
}

/// One direction of an undirected edge, oriented child to parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
    pub w: f64,
}

/// Variable index maps for `ILP_P3`.
#[derive(Debug, Clone)]
pub struct IlpP3Layout {
    pub arcs: Vec<Arc>,
    /// Tree-edge indicator per arc.
    pub x: Vec<VarId>,
    /// Flow per arc.
    pub f: Vec<VarId>,
    /// Non-leaf indicator per node, present with the accuracy constraint.
    pub l: Option<Vec<VarId>>,
    /// Arc indices leaving each node (`O_v`).
    pub out_arcs: Vec<Vec<usize>>,
    /// Arc indices entering each node (`I_v`).
    pub in_arcs: Vec<Vec<usize>>,
}

/// Builds the single-commodity flow model: every node sends one unit of
/// flow to the base along tree arcs, and the objective weighs each arc's
/// flow by its edge weight.
pub fn build_ilp_p3(
    g: &NetworkGraph,
    c: &DelayConstraints,
    accuracy: Option<usize>,
) -> Result<(MilpModel, IlpP3Layout)> {
    let n = g.num_nodes();
    c.validate(n)?;
    let nf = n as f64;
    let mut m = MilpModel::with_sense(Sense::Minimize);
    let mut arcs = Vec::with_capacity(2 * g.num_edges());
    for e in g.edges() {
        arcs.push(Arc { from: e.u, to: e.v, w: e.w });
        arcs.push(Arc { from: e.v, to: e.u, w: e.w });
    }
    let mut out_arcs = vec![Vec::new(); n];
    let mut in_arcs = vec![Vec::new(); n];
    for (a, arc) in arcs.iter().enumerate() {
        out_arcs[arc.from].push(a);
        in_arcs[arc.to].push(a);
    }
    let x: Vec<VarId> = arcs
        .iter()
        .map(|a| m.add_binary(format!("x[{},{}]", a.from, a.to), 0.0))
        .collect();
    let f: Vec<VarId> = arcs
        .iter()
        .map(|a| {
            m.add_var(
                format!("f[{},{}]", a.from, a.to),
                shmnet_lp::VarKind::Integer,
                0.0,
                nf - 1.0,
                a.w,
            )
        })
        .collect();

    for v in 0..n {
        let mut row: Vec<(VarId, f64)> = in_arcs[v].iter().map(|&a| (f[a], 1.0)).collect();
        row.extend(out_arcs[v].iter().map(|&a| (f[a], -1.0)));
        let rhs = if v == BASE { nf - 1.0 } else { -1.0 };
        m.add_constraint(format!("flow[{v}]"), row, Relation::Eq, rhs);
    }
    for a in 0..arcs.len() {
        m.add_constraint(
            format!("link[{},{}]", arcs[a].from, arcs[a].to),
            [(f[a], 1.0), (x[a], -(nf - 1.0))],
            Relation::Le,
            0.0,
        );
    }
    m.add_constraint("tree_size", x.iter().map(|&v| (v, 1.0)), Relation::Eq, nf - 1.0);
    for v in 0..n {
        if v != BASE {
            m.add_constraint(
                format!("one_parent[{v}]"),
                out_arcs[v].iter().map(|&a| (x[a], 1.0)),
                Relation::Eq,
                1.0,
            );
        }
        m.add_constraint(
            format!("capacity[{v}]"),
            in_arcs[v].iter().map(|&a| (x[a], 1.0)),
            Relation::Le,
            c.child_capacity(v) as f64,
        );
    }
    let l = accuracy.map(|n_a| {
        let mut l = Vec::with_capacity(n);
        for v in 0..n {
            let lv = m.add_binary(format!("l[{v}]"), 0.0);
            let kids = || in_arcs[v].iter().map(|&a| (x[a], 1.0));
            let mut row: Vec<_> = kids().collect();
            row.push((lv, -(n_a as f64 - 1.0)));
            m.add_constraint(format!("accuracy[{v}]"), row, Relation::Ge, 0.0);
            let mut row: Vec<_> = kids().collect();
            row.push((lv, -nf));
            m.add_constraint(format!("nonleaf_lo[{v}]"), row, Relation::Le, 0.0);
            let mut row: Vec<_> = kids().map(|(var, a)| (var, -a)).collect();
            row.push((lv, 1.0));
            m.add_constraint(format!("nonleaf_hi[{v}]"), row, Relation::Le, 0.0);
            l.push(lv);
        }
        l
    });
    Ok((
        m,
        IlpP3Layout {
            arcs,
            x,
            f,
            l,
            out_arcs,
            in_arcs,
        },
    ))
}

/// Reads the tree out of an optimal `ILP_P3` solution, re-checking flow
/// conservation.
pub fn extract_tree_p3(sol: &MilpSolution, layout: &IlpP3Layout, g: &NetworkGraph) -> Result<RoutedTree> {
    if sol.status != Status::Optimal {
        return Err(Error::InconsistentSolution(format!("status {:?}", sol.status)));
    }
    let n = g.num_nodes();
    let mut parent = vec![None; n];
    for (a, arc) in layout.arcs.iter().enumerate() {
        if sol.is_set(layout.x[a]) {
            if parent[arc.from].is_some() || arc.from == BASE {
                return Err(Error::InconsistentSolution(format!("node {} has two parents", arc.from)));
            }
            parent[arc.from] = Some(arc.to);
        }
    }
    for v in 0..n {
        let flow = |arcs: &[usize]| -> i64 { arcs.iter().map(|&a| sol.int_value(layout.f[a])).sum() };
        let net = flow(&layout.in_arcs[v]) - flow(&layout.out_arcs[v]);
        let want = if v == BASE { n as i64 - 1 } else { -1 };
        if net != want {
            return Err(Error::InconsistentSolution(format!("flow imbalance {net} at node {v}")));
        }
    }
    RoutedTree::from_parents(g, parent).map_err(|e| Error::InconsistentSolution(e.to_string()))
}

/// Variable index maps for the hop-indexed form of `ILP_P3`.
#[derive(Debug, Clone)]
pub struct LayeredP3Layout {
    /// `(child, parent, child depth)` for each attachment variable.
    pub attach: Vec<(NodeId, NodeId, usize)>,
    pub x: Vec<VarId>,
    /// `(node, depth, var)` non-leaf indicators, present with the accuracy
    /// constraint.
    pub nonleaf: Option<Vec<(NodeId, usize, VarId)>>,
    /// Depth window `[lo, hi]` per node.
    pub window: Vec<(usize, usize)>,
}

impl LayeredP3Layout {
    /// The assignment that encodes `t`, or `None` if some node lies outside
    /// its depth window.
    pub fn encode_tree(&self, t: &RoutedTree, num_vars: usize) -> Option<Vec<f64>> {
        let mut values = vec![0.0; num_vars];
        let mut covered = 1;
        for (i, &(v, u, h)) in self.attach.iter().enumerate() {
            if t.parent(v) == Some(u) && t.depth(v) == h {
                values[self.x[i]] = 1.0;
                covered += 1;
            }
        }
        if covered != t.parents().len() {
            return None;
        }
        if let Some(nonleaf) = &self.nonleaf {
            for &(u, h, var) in nonleaf {
                if t.depth(u) == h && !t.is_leaf(u) {
                    values[var] = 1.0;
                }
            }
        }
        Some(values)
    }
}

/// Builds the hop-indexed model for unit-weight graphs: `x[v,u,h]` attaches
/// `v` to `u` at depth `h`, and the objective is the sum of depths.
///
/// Each node's depth is restricted to `[d0(v), d0(v) + slack]`. Any tree
/// whose depth sum exceeds the shortest-path sum by at most `slack` fits, so
/// passing the gap of a known tree keeps every tree at least as good.
pub fn build_ilp_p3_layered(
    g: &NetworkGraph,
    c: &DelayConstraints,
    accuracy: Option<usize>,
    slack: usize,
) -> Result<(MilpModel, LayeredP3Layout)> {
    let n = g.num_nodes();
    c.validate(n)?;
    if !g.is_unit_weight() {
        return Err(Error::Unsupported("the hop-indexed model needs unit edge weights".into()));
    }
    let spt = crate::netmodel::shortest_paths(g);
    let window: Vec<(usize, usize)> = (0..n)
        .map(|v| {
            let lo = spt.hops(v, BASE);
            if v == BASE {
                (0, 0)
            } else {
                (lo, (lo + slack).min(n - 1))
            }
        })
        .collect();
    let mut m = MilpModel::with_sense(Sense::Minimize);
    let mut attach = Vec::new();
    let mut x = Vec::new();
    // kids[u][h - lo_u] lists variables that hang a child under u at depth h
    let mut kids: Vec<Vec<Vec<VarId>>> = window.iter().map(|&(lo, hi)| vec![Vec::new(); hi - lo + 1]).collect();
    let mut here: Vec<Vec<Vec<VarId>>> = kids.clone();
    for v in 1..n {
        let (lo, hi) = window[v];
        for h in lo..=hi {
            for &(u, _) in g.neighbors(v) {
                let (ulo, uhi) = window[u];
                if h - 1 < ulo || h - 1 > uhi {
                    continue;
                }
                let var = m.add_binary(format!("x[{v},{u},{h}]"), h as f64);
                attach.push((v, u, h));
                x.push(var);
                kids[u][h - 1 - ulo].push(var);
                here[v][h - lo].push(var);
            }
        }
    }
    for v in 1..n {
        let row: Vec<(VarId, f64)> = here[v].iter().flatten().map(|&var| (var, 1.0)).collect();
        if row.is_empty() {
            return Err(Error::Infeasible(format!("node {v} has no attachment inside its depth window")));
        }
        m.add_constraint(format!("assign[{v}]"), row, Relation::Eq, 1.0);
    }
    let mut nonleaf = accuracy.map(|_| Vec::new());
    for u in 0..n {
        let cap = c.child_capacity(u) as f64;
        let lo = window[u].0;
        for (k, level) in kids[u].iter().enumerate() {
            if level.is_empty() {
                continue;
            }
            let h = lo + k;
            let children = || level.iter().map(|&var| (var, 1.0));
            let present = || here[u][k].iter().map(|&var| (var, 1.0));
            match (accuracy, nonleaf.as_mut()) {
                (Some(n_a), Some(list)) => {
                    let y = m.add_binary(format!("y[{u},{h}]"), 0.0);
                    list.push((u, h, y));
                    let mut row: Vec<_> = children().collect();
                    row.push((y, -cap));
                    m.add_constraint(format!("capacity[{u},{h}]"), row, Relation::Le, 0.0);
                    let mut row: Vec<_> = children().collect();
                    row.push((y, -(n_a as f64 - 1.0)));
                    m.add_constraint(format!("accuracy[{u},{h}]"), row, Relation::Ge, 0.0);
                    if u != BASE {
                        let mut row: Vec<_> = present().map(|(var, a)| (var, -a)).collect();
                        row.push((y, 1.0));
                        m.add_constraint(format!("present[{u},{h}]"), row, Relation::Le, 0.0);
                    }
                }
                _ => {
                    let mut row: Vec<_> = children().collect();
                    if u == BASE {
                        m.add_constraint(format!("capacity[{u},{h}]"), row, Relation::Le, cap);
                    } else {
                        row.extend(present().map(|(var, a)| (var, -cap * a)));
                        m.add_constraint(format!("capacity[{u},{h}]"), row, Relation::Le, 0.0);
                    }
                }
            }
            if u != BASE {
                for &child in level {
                    let mut row: Vec<_> = present().map(|(var, a)| (var, -a)).collect();
                    row.push((child, 1.0));
                    m.add_constraint(format!("link[{u},{h}]"), row, Relation::Le, 0.0);
                }
            }
        }
    }
    Ok((
        m,
        LayeredP3Layout {
            attach,
            x,
            nonleaf,
            window,
        },
    ))
}

/// Reads the tree out of a hop-indexed solution and checks that every
/// node sits at the depth its variable claims.
pub fn extract_tree_p3_layered(sol: &MilpSolution, layout: &LayeredP3Layout, g: &NetworkGraph) -> Result<RoutedTree> {
    if sol.status != Status::Optimal {
        return Err(Error::InconsistentSolution(format!("status {:?}", sol.status)));
    }
    let n = g.num_nodes();
    let mut parent = vec![None; n];
    let mut claimed = vec![0; n];
    for (i, &(v, u, h)) in layout.attach.iter().enumerate() {
        if sol.is_set(layout.x[i]) {
            if parent[v].is_some() {
                return Err(Error::InconsistentSolution(format!("node {v} has two parents")));
            }
            parent[v] = Some(u);
            claimed[v] = h;
        }
    }
    let t = RoutedTree::from_parents(g, parent).map_err(|e| Error::InconsistentSolution(e.to_string()))?;
    if let Some(v) = (0..n).find(|&v| t.depth(v) != claimed[v]) {
        return Err(Error::InconsistentSolution(format!(
            "node {v} at depth {} but labelled {}",
            t.depth(v),
            claimed[v]
        )));
    }
    Ok(t)
}
