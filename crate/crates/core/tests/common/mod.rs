//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use shmnet_core::annealing::{sa_cost, HeadRouting, SaPlan, SaSchedule};
use shmnet_core::netmodel::{DelayConstraints, EnergyParams, NetworkGraph, NodeId, ShortestPathTable};
use shmnet_core::plans::{plan_energy, validate_plan, CommPlan};
use shmnet_core::trees::RoutedTree;

/// Connected graph on `n` nodes: a random spanning tree plus each other
/// pair with probability `p`. Weights are drawn from `1..=max_w`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, max_w: u32) -> NetworkGraph {
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for i in 1..n {
        let u = order[i];
        let v = order[rng.gen_range(0..i)];
        present[u][v] = true;
        present[v][u] = true;
        edges.push((u, v, rng.gen_range(1..=max_w) as f64));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.gen_bool(p) {
                edges.push((u, v, rng.gen_range(1..=max_w) as f64));
            }
        }
    }
    NetworkGraph::new(n, edges).expect("spanning tree keeps it connected")
}

/// Every spanning tree of `g`, found by trying every parent choice.
pub fn spanning_trees(g: &NetworkGraph) -> Vec<RoutedTree> {
    let n = g.num_nodes();
    let choices: Vec<Vec<NodeId>> = (0..n).map(|v| g.neighbors(v).iter().map(|&(u, _)| u).collect()).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; n];
    loop {
        let parents: Vec<Option<NodeId>> = (0..n)
            .map(|v| if v == 0 { None } else { Some(choices[v][pick[v]]) })
            .collect();
        if let Ok(t) = RoutedTree::from_parents(g, parents) {
            out.push(t);
        }
        let mut v = 1;
        loop {
            if v == n {
                return out;
            }
            pick[v] += 1;
            if pick[v] < choices[v].len() {
                break;
            }
            pick[v] = 0;
            v += 1;
        }
    }
}

/// Sum of weighted depths, computed by walking up to the root.
pub fn depth_sum(t: &RoutedTree, g: &NetworkGraph) -> f64 {
    let mut total = 0.0;
    for v in 0..g.num_nodes() {
        let mut x = v;
        while let Some(p) = t.parent(x) {
            total += g.weight(x, p).unwrap();
            x = p;
        }
    }
    total
}

pub fn satisfies(t: &RoutedTree, c: &DelayConstraints) -> bool {
    (0..t.num_nodes()).all(|v| {
        let k = t.children_count(v);
        k + 1 <= c.n[v] && (k == 0 || c.n_a.map_or(true, |a| k + 1 >= a))
    })
}

/// Optimal DDCT objective by enumeration, `None` when no tree qualifies.
pub fn brute_ddct(g: &NetworkGraph, c: &DelayConstraints) -> Option<f64> {
    spanning_trees(g)
        .iter()
        .filter(|t| satisfies(t, c))
        .map(|t| depth_sum(t, g))
        .min_by(f64::total_cmp)
}

/// Minimum path weight and, among those, minimum hop count between all
/// pairs, by enumerating simple paths.
pub fn brute_paths(g: &NetworkGraph) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let n = g.num_nodes();
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    let mut hops = vec![vec![usize::MAX; n]; n];
    fn walk(
        g: &NetworkGraph,
        src: NodeId,
        at: NodeId,
        w: f64,
        h: usize,
        seen: &mut Vec<bool>,
        dist: &mut [Vec<f64>],
        hops: &mut [Vec<usize>],
    ) {
        let (d, k) = (&mut dist[src][at], &mut hops[src][at]);
        if w < *d - 1e-9 || ((w - *d).abs() <= 1e-9 && h < *k) {
            *d = w;
            *k = h;
        }
        for &(u, wu) in g.neighbors(at) {
            if !seen[u] {
                seen[u] = true;
                walk(g, src, u, w + wu, h + 1, seen, dist, hops);
                seen[u] = false;
            }
        }
    }
    for s in 0..n {
        let mut seen = vec![false; n];
        seen[s] = true;
        walk(g, s, s, 0.0, 0, &mut seen, &mut dist, &mut hops);
    }
    (dist, hops)
}

/// Minimum energy over every assignment matrix that passes the plan checks.
pub fn brute_plan(spt: &ShortestPathTable, c: &DelayConstraints, e: &EnergyParams) -> Option<(f64, CommPlan)> {
    let n = spt.num_nodes();
    assert!(n * n <= 20, "plan enumeration is exponential in |V|^2");
    let mut best: Option<(f64, CommPlan)> = None;
    for mask in 0u32..(1 << (n * n)) {
        let pairs = (0..n * n).filter(|b| mask >> b & 1 == 1).map(|b| (b / n, b % n));
        let plan = CommPlan::from_pairs(n, pairs);
        if !validate_plan(&plan, c).is_empty() {
            continue;
        }
        let energy = plan_energy(&plan, spt, e).unwrap().total;
        if best.as_ref().map_or(true, |(b, _)| energy < *b) {
            best = Some((energy, plan));
        }
    }
    best
}

/// Cheapest annealing plan over every cluster assignment and head choice.
pub fn brute_sa(spt: &ShortestPathTable, sched: &SaSchedule) -> f64 {
    let n = spt.num_nodes();
    let m = sched.num_steps();
    let mut best = f64::INFINITY;
    let mut label = vec![0usize; n];
    loop {
        let clusters: Vec<Vec<NodeId>> = (0..m).map(|j| (0..n).filter(|&v| label[v] == j + 1).collect()).collect();
        if clusters.iter().zip(&sched.steps).all(|(c, s)| c.len() == s.k) {
            let mut heads = vec![0usize; m];
            'heads: loop {
                let plan = SaPlan {
                    clusters: clusters.clone(),
                    heads: (0..m).map(|j| clusters[j][heads[j]]).collect(),
                };
                best = best.min(sa_cost(&plan, sched, spt, HeadRouting::Chain).unwrap());
                for j in 0..m {
                    heads[j] += 1;
                    if heads[j] < clusters[j].len() {
                        continue 'heads;
                    }
                    heads[j] = 0;
                }
                break;
            }
        }
        let mut v = 0;
        loop {
            if v == n {
                return best;
            }
            label[v] += 1;
            if label[v] <= m {
                break;
            }
            label[v] = 0;
            v += 1;
        }
    }
}
