//! Network graphs, random deployments, shortest paths and energy parameters.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type NodeId = usize;

/// The base station is always node 0.
pub const BASE: NodeId = 0;

/// Absolute tolerance for comparing path weights.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Connectivity retries for [`generate_random_topology`].
pub const MAX_TOPOLOGY_ATTEMPTS: u64 = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("graph needs at least one node")]
    Empty,
    #[error("node {node} out of range for a graph with {num_nodes} nodes")]
    NodeOutOfRange { node: NodeId, num_nodes: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge {u}-{v} has invalid weight {w}")]
    BadWeight { u: NodeId, v: NodeId, w: f64 },
    #[error("graph is disconnected: node {0} cannot reach the base")]
    Disconnected(NodeId),
    #[error("no connected topology found for seed {seed} after {attempts} attempts")]
    TopologyUnconnectable { seed: u64, attempts: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub w: f64,
}

/// Undirected, connected, weighted graph rooted at [`BASE`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    num_nodes: usize,
    positions: Option<Vec<(f64, f64)>>,
    edges: Vec<Edge>,
    adj: Vec<Vec<(NodeId, f64)>>,
}

impl NetworkGraph {
    /// Builds a graph from `(u, v, w)` triples, checking the structural
    /// invariants and connectivity.
    pub fn new(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Result<Self, NetError> {
        if num_nodes == 0 {
            return Err(NetError::Empty);
        }
        let mut list = Vec::new();
        for (a, b, w) in edges {
            for node in [a, b] {
                if node >= num_nodes {
                    return Err(NetError::NodeOutOfRange { node, num_nodes });
                }
            }
            if a == b {
                return Err(NetError::SelfLoop(a));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(NetError::BadWeight { u: a, v: b, w });
            }
            list.push(Edge {
                u: a.min(b),
                v: a.max(b),
                w,
            });
        }
        list.sort_by_key(|e| (e.u, e.v));
        if let Some(pair) = list.windows(2).find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(NetError::DuplicateEdge(pair[0].u, pair[0].v));
        }
        let mut adj = vec![Vec::new(); num_nodes];
        for e in &list {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        for nbrs in &mut adj {
            nbrs.sort_by_key(|&(v, _)| v);
        }
        let g = NetworkGraph {
            num_nodes,
            positions: None,
            edges: list,
            adj,
        };
        if let Some(v) = g.unreachable_node() {
            return Err(NetError::Disconnected(v));
        }
        Ok(g)
    }

    /// Attaches planar coordinates (meters) to the nodes.
    pub fn with_positions(mut self, positions: Vec<(f64, f64)>) -> Result<Self, NetError> {
        if positions.len() != self.num_nodes {
            return Err(NetError::InvalidParameter(format!(
                "{} positions for {} nodes",
                positions.len(),
                self.num_nodes
            )));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    /// Unit-weight path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v - 1, v, 1.0))).expect("path is connected")
    }

    /// Unit-weight star centred at the base.
    pub fn star(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (0, v, 1.0))).expect("star is connected")
    }

    /// Unit-weight complete graph.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0)));
        Self::new(n, edges).expect("complete graph is connected")
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges with `u < v`, sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `v` with edge weights, sorted by id.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.adj[u]
            .binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| self.adj[u][i].1)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.weight(u, v).is_some()
    }

    pub fn positions(&self) -> Option<&[(f64, f64)]> {
        self.positions.as_deref()
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.w == 1.0)
    }

    /// Same topology with every edge weight replaced by `f(edge)`.
    pub fn reweighted(&self, mut f: impl FnMut(&Edge) -> f64) -> Result<Self, NetError> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e.u, e.v, f(e))).collect();
        let g = Self::new(self.num_nodes, edges)?;
        match &self.positions {
            Some(p) => g.with_positions(p.clone()),
            None => Ok(g),
        }
    }

    /// Applies a node relabeling `perm[old] = new`; `perm[0]` must be 0.
    pub fn relabeled(&self, perm: &[NodeId]) -> Result<Self, NetError> {
        if perm.len() != self.num_nodes || perm.first() != Some(&BASE) {
            return Err(NetError::InvalidParameter("relabeling must fix the base".into()));
        }
        let g = Self::new(
            self.num_nodes,
            self.edges.iter().map(|e| (perm[e.u], perm[e.v], e.w)),
        )?;
        match &self.positions {
            Some(p) => {
                let mut moved = vec![(0.0, 0.0); p.len()];
                for (old, &xy) in p.iter().enumerate() {
                    moved[perm[old]] = xy;
                }
                g.with_positions(moved)
            }
            None => Ok(g),
        }
    }

    fn unreachable_node(&self) -> Option<NodeId> {
        let mut seen = vec![false; self.num_nodes];
        let mut stack = vec![BASE];
        seen[BASE] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    /// Serializes as `nodes N base 0`, `edge i j w` and `pos i x y` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes {} base {}\n", self.num_nodes, BASE);
        for e in &self.edges {
            writeln!(out, "edge {} {} {}", e.u, e.v, e.w).unwrap();
        }
        if let Some(pos) = &self.positions {
            for (i, (x, y)) in pos.iter().enumerate() {
                writeln!(out, "pos {i} {x} {y}").unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, NetError> {
        let mut num_nodes = None;
        let mut edges = Vec::new();
        let mut positions: Vec<Option<(f64, f64)>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: &str| NetError::Parse {
                line,
                msg: msg.to_string(),
            };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let int = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad integer `{s}`")));
            let real = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("bad number `{s}`")));
            match fields.as_slice() {
                ["nodes", n, "base", b] => {
                    if num_nodes.is_some() {
                        return Err(err("duplicate header"));
                    }
                    if int(b)? != BASE {
                        return Err(err("base station must be node 0"));
                    }
                    let n = int(n)?;
                    num_nodes = Some(n);
                    positions = vec![None; n];
                }
                ["edge", u, v, w] => {
                    if num_nodes.is_none() {
                        return Err(err("edge before header"));
                    }
                    edges.push((int(u)?, int(v)?, real(w)?));
                }
                ["pos", i, x, y] => {
                    let i = int(i)?;
                    let slot = positions.get_mut(i).ok_or_else(|| err("position for unknown node"))?;
                    *slot = Some((real(x)?, real(y)?));
                }
                _ => return Err(err(&format!("unrecognised line `{body}`"))),
            }
        }
        let n = num_nodes.ok_or(NetError::Parse {
            line: 0,
            msg: "missing `nodes N base 0` header".into(),
        })?;
        let g = Self::new(n, edges)?;
        if positions.iter().all(Option::is_none) {
            return Ok(g);
        }
        let pos: Option<Vec<_>> = positions.into_iter().collect();
        match pos {
            Some(p) => g.with_positions(p),
            None => Err(NetError::Parse {
                line: 0,
                msg: "positions given for some nodes only".into(),
            }),
        }
    }
}

/// Uniform random deployment in a `side` x `side` square with unit-weight
/// edges between nodes at most `tx_range` apart.
///
/// Disconnected draws are retried with seeds `seed + 1`, `seed + 2`, ...
pub fn generate_random_topology(
    seed: u64,
    num_nodes: usize,
    side: f64,
    tx_range: f64,
) -> Result<NetworkGraph, NetError> {
    if num_nodes < 2 {
        return Err(NetError::InvalidParameter("need at least two nodes".into()));
    }
    if !(side > 0.0 && tx_range > 0.0) {
        return Err(NetError::InvalidParameter("side and range must be positive".into()));
    }
    for attempt in 0..MAX_TOPOLOGY_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let pos: Vec<(f64, f64)> = (0..num_nodes)
            .map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
            .collect();
        let mut edges = Vec::new();
        for u in 0..num_nodes {
            for v in u + 1..num_nodes {
                let d = (pos[u].0 - pos[v].0).hypot(pos[u].1 - pos[v].1);
                if d <= tx_range {
                    edges.push((u, v, 1.0));
                }
            }
        }
        match NetworkGraph::new(num_nodes, edges) {
            Ok(g) => return g.with_positions(pos),
            Err(NetError::Disconnected(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(NetError::TopologyUnconnectable {
        seed,
        attempts: MAX_TOPOLOGY_ATTEMPTS,
    })
}

/// Link weight from a received signal strength and a packet-collision
/// probability, as measured on the Narada platform.
pub fn narada_link_weight(rssi_dbm: f64, p_cf: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p_cf), "p_cf must be a probability");
    (1.0 - p_cf) / (1.0 + (-0.4 * (40.0 + rssi_dbm)).exp())
}

/// Message sizes and per-bit radio energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// Size of one FFT message (`R`), bytes.
    pub fft_bytes: f64,
    /// Size of one eigenvector message (`r`), bytes.
    pub eig_bytes: f64,
    pub e_tx: f64,
    pub e_rx: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            fft_bytes: 8192.0,
            eig_bytes: 32.0,
            e_tx: 0.5,
            e_rx: 0.5,
        }
    }
}

impl EnergyParams {
    pub fn new(fft_bytes: f64, eig_bytes: f64, e_tx: f64, e_rx: f64) -> Result<Self, NetError> {
        let p = EnergyParams {
            fft_bytes,
            eig_bytes,
            e_tx,
            e_rx,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.fft_bytes > self.eig_bytes && self.eig_bytes > 0.0) {
            return Err(NetError::InvalidParameter(format!(
                "need R > r > 0, got R={} r={}",
                self.fft_bytes, self.eig_bytes
            )));
        }
        if !(self.e_tx >= 0.0 && self.e_rx >= 0.0 && self.e_b() > 0.0) {
            return Err(NetError::InvalidParameter("per-bit energy must be positive".into()));
        }
        Ok(())
    }

    /// Energy per bit moved one hop.
    pub fn e_b(&self) -> f64 {
        self.e_tx + self.e_rx
    }
}

/// Per-node cluster-size limits (`n_v`) and an optional minimum cluster
/// size (`n_a`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayConstraints {
    pub n: Vec<usize>,
    pub n_a: Option<usize>,
}

impl DelayConstraints {
    pub fn uniform(num_nodes: usize, n: usize) -> Self {
        DelayConstraints {
            n: vec![n; num_nodes],
            n_a: None,
        }
    }

    pub fn per_node(n: Vec<usize>) -> Self {
        DelayConstraints { n, n_a: None }
    }

    pub fn with_accuracy(mut self, n_a: usize) -> Self {
        self.n_a = Some(n_a);
        self
    }

    pub fn n_max(&self) -> usize {
        self.n.iter().copied().max().unwrap_or(0)
    }

    /// Maximum number of children `v` may have in a tree.
    pub fn child_capacity(&self, v: NodeId) -> usize {
        self.n[v].saturating_sub(1)
    }

    pub fn validate(&self, num_nodes: usize) -> Result<(), NetError> {
        if self.n.len() != num_nodes {
            return Err(NetError::InvalidParameter(format!(
                "{} limits for {} nodes",
                self.n.len(),
                num_nodes
            )));
        }
        if let Some(v) = self.n.iter().position(|&n| n == 0) {
            return Err(NetError::InvalidParameter(format!("n_{v} must be at least 1")));
        }
        if let Some(n_a) = self.n_a {
            if n_a == 0 || n_a > self.n_max() {
                return Err(NetError::InvalidParameter(format!(
                    "n_a={n_a} must lie in 1..={}",
                    self.n_max()
                )));
            }
        }
        Ok(())
    }
}

/// All-pairs shortest paths with deterministic next hops.
///
/// Among minimum-weight paths the one with fewest hops is preferred, and the
/// next hop is the lowest-id neighbour continuing such a path.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTable {
    dist: Vec<Vec<f64>>,
    hops: Vec<Vec<usize>>,
    next: Vec<Vec<NodeId>>,
}

pub fn shortest_paths(g: &NetworkGraph) -> ShortestPathTable {
    let n = g.num_nodes();
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    let mut hops = vec![vec![usize::MAX; n]; n];
    for i in 0..n {
        dist[i][i] = 0.0;
        hops[i][i] = 0;
    }
    for e in g.edges() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            dist[a][b] = e.w;
            hops[a][b] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if hops[i][k] == usize::MAX {
                continue;
            }
            for j in 0..n {
                if hops[k][j] == usize::MAX {
                    continue;
                }
                let w = dist[i][k] + dist[k][j];
                let h = hops[i][k] + hops[k][j];
                if w < dist[i][j] - WEIGHT_TOL || ((w - dist[i][j]).abs() <= WEIGHT_TOL && h < hops[i][j]) {
                    dist[i][j] = w;
                    hops[i][j] = h;
                }
            }
        }
    }
    let mut next = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            next[i][j] = if i == j {
                i
            } else {
                g.neighbors(i)
                    .iter()
                    .find(|&&(u, w)| {
                        hops[u][j] != usize::MAX
                            && hops[u][j] + 1 == hops[i][j]
                            && (w + dist[u][j] - dist[i][j]).abs() <= WEIGHT_TOL
                    })
                    .map(|&(u, _)| u)
                    .expect("connected graph has a next hop")
            };
        }
    }
    ShortestPathTable { dist, hops, next }
}

impl ShortestPathTable {
    pub fn num_nodes(&self) -> usize {
        self.dist.len()
    }

    /// Minimum path weight `W_ij`.
    pub fn dist(&self, i: NodeId, j: NodeId) -> f64 {
        self.dist[i][j]
    }

    /// Hop count of the chosen minimum-weight path.
    pub fn hops(&self, i: NodeId, j: NodeId) -> usize {
        self.hops[i][j]
    }

    pub fn next_hop(&self, i: NodeId, j: NodeId) -> NodeId {
        self.next[i][j]
    }

    /// Node sequence from `i` to `j` following next hops.
    pub fn path(&self, i: NodeId, j: NodeId) -> Vec<NodeId> {
        let mut out = vec![i];
        let mut cur = i;
        while cur != j {
            cur = self.next[cur][j];
            out.push(cur);
        }
        out
    }
}
