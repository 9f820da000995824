//! Batch comparison of planners over seeded random deployments.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shmnet_lp::{solve_milp, MilpError, Status};

use crate::approx::{daa, lpr};
use crate::error::{Error, Result};
use crate::milp_models::{build_ilp_p1, extract_plan_p1, P1Options, P1_MAX_NODES};
use crate::netmodel::{
    generate_random_topology, shortest_paths, DelayConstraints, EnergyParams, NetworkGraph, ShortestPathTable,
};
use crate::plans::{
    centralized_baseline_energy, lower_bound_for, min_head_count, plan_energy, tree_solution, CommPlan,
};
use crate::trees::{build_ddct_ilp, build_mdct, MdctMode, RoutedTree};

/// Largest graph for which `mdct_p2` tries the exact model first.
const MDCT_EXACT_MAX_NODES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    LowerBound,
    IlpP1,
    IlpP3,
    Lpr,
    Daa,
    Centralized,
    MdctP2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::LowerBound,
        Algorithm::IlpP1,
        Algorithm::IlpP3,
        Algorithm::Lpr,
        Algorithm::Daa,
        Algorithm::Centralized,
        Algorithm::MdctP2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LowerBound => "lower_bound",
            Algorithm::IlpP1 => "ilp_p1",
            Algorithm::IlpP3 => "ilp_p3",
            Algorithm::Lpr => "lpr",
            Algorithm::Daa => "daa",
            Algorithm::Centralized => "centralized",
            Algorithm::MdctP2 => "mdct_p2",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub num_nodes: usize,
    pub side: f64,
    pub tx_range: f64,
    pub seeds: Vec<u64>,
    /// Use this graph instead of random deployments.
    pub graph_file: Option<PathBuf>,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            num_nodes: 30,
            side: 50.0,
            tx_range: 30.0,
            seeds: vec![1],
            graph_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    #[serde(rename = "R_bytes")]
    pub fft_bytes: f64,
    #[serde(rename = "r_bytes")]
    pub eig_bytes: f64,
    pub e_tx: f64,
    pub e_rx: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        let e = EnergyParams::default();
        EnergyConfig {
            fft_bytes: e.fft_bytes,
            eig_bytes: e.eig_bytes,
            e_tx: e.e_tx,
            e_rx: e.e_rx,
        }
    }
}

impl EnergyConfig {
    pub fn params(&self) -> Result<EnergyParams> {
        Ok(EnergyParams::new(self.fft_bytes, self.eig_bytes, self.e_tx, self.e_rx)?)
    }
}

/// A single limit for every node or one per node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeLimit {
    Uniform(usize),
    PerNode(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    pub n: NodeLimit,
    pub n_a: Option<usize>,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        ConstraintConfig {
            n: NodeLimit::Uniform(6),
            n_a: None,
        }
    }
}

impl ConstraintConfig {
    pub fn for_graph(&self, num_nodes: usize) -> Result<DelayConstraints> {
        let mut c = match &self.n {
            NodeLimit::Uniform(n) => DelayConstraints::uniform(num_nodes, *n),
            NodeLimit::PerNode(v) => DelayConstraints::per_node(v.clone()),
        };
        c.n_a = self.n_a;
        c.validate(num_nodes)?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub ilp_p1_seconds: f64,
    pub ilp_p3_seconds: f64,
    pub mdct_seconds: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            ilp_p1_seconds: 60.0,
            ilp_p3_seconds: 60.0,
            mdct_seconds: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    /// Fill `runtime_ms`; off by default so repeated runs give identical files.
    pub record_runtime: bool,
}

/// Everything one experiment needs. Parsed from TOML, where dotted keys such
/// as `topology.num_nodes = 30` address the nested sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologyConfig,
    pub energy: EnergyConfig,
    pub constraints: ConstraintConfig,
    pub algorithms: Vec<Algorithm>,
    pub budgets: BudgetConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            topology: TopologyConfig::default(),
            energy: EnergyConfig::default(),
            constraints: ConstraintConfig::default(),
            algorithms: vec![Algorithm::LowerBound, Algorithm::Lpr, Algorithm::Daa, Algorithm::Centralized],
            budgets: BudgetConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.topology.graph_file.is_none() {
            if self.topology.seeds.is_empty() {
                return Err(Error::Config("no seeds given".into()));
            }
            if self.algorithms.contains(&Algorithm::IlpP1) && self.topology.num_nodes > P1_MAX_NODES {
                return Err(Error::Config(format!(
                    "ilp_p1 needs num_nodes <= {P1_MAX_NODES}, got {}",
                    self.topology.num_nodes
                )));
            }
            self.constraints.for_graph(self.topology.num_nodes)?;
        }
        self.energy.params()?;
        for (name, secs) in [
            ("ilp_p1_seconds", self.budgets.ilp_p1_seconds),
            ("ilp_p3_seconds", self.budgets.ilp_p3_seconds),
            ("mdct_seconds", self.budgets.mdct_seconds),
        ] {
            if !(secs.is_finite() && secs > 0.0) {
                return Err(Error::Config(format!("budgets.{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Optimal,
    Heuristic,
    Bound,
    Baseline,
    TimeBudgetExceeded,
    Infeasible,
    Failed,
}

/// One algorithm on one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub energy_total: Option<f64>,
    pub fft_bytes: Option<f64>,
    pub eig_bytes: Option<f64>,
    pub tree_height: Option<usize>,
    pub num_heads: Option<usize>,
    pub gap_vs_lower_bound: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub status: RowStatus,
}

impl ResultRow {
    fn empty(seed: u64, algorithm: Algorithm, status: RowStatus) -> Self {
        ResultRow {
            seed,
            algorithm,
            energy_total: None,
            fft_bytes: None,
            eig_bytes: None,
            tree_height: None,
            num_heads: None,
            gap_vs_lower_bound: None,
            runtime_ms: None,
            status,
        }
    }
}

struct Instance<'a> {
    g: &'a NetworkGraph,
    spt: ShortestPathTable,
    c: DelayConstraints,
    e: EnergyParams,
    lb: f64,
    budgets: &'a BudgetConfig,
}

impl Instance<'_> {
    fn plan_row(&self, seed: u64, alg: Algorithm, plan: &CommPlan, height: Option<usize>, status: RowStatus) -> ResultRow {
        match plan_energy(plan, &self.spt, &self.e) {
            Ok(rep) => ResultRow {
                energy_total: Some(rep.total),
                fft_bytes: Some(rep.fft_component),
                eig_bytes: Some(rep.eig_component),
                tree_height: height,
                num_heads: Some(plan.heads().len()),
                gap_vs_lower_bound: Some(rep.total / self.lb),
                ..ResultRow::empty(seed, alg, status)
            },
            Err(_) => ResultRow::empty(seed, alg, RowStatus::Failed),
        }
    }

    fn tree_row(&self, seed: u64, alg: Algorithm, tree: Result<RoutedTree>, status: RowStatus) -> ResultRow {
        match tree {
            Ok(t) => self.plan_row(seed, alg, &tree_solution(&t), Some(t.height()), status),
            Err(e) => ResultRow::empty(seed, alg, error_status(&e)),
        }
    }

    fn run(&self, seed: u64, alg: Algorithm) -> ResultRow {
        let secs = |s: f64| Duration::from_secs_f64(s);
        match alg {
            Algorithm::LowerBound => {
                let s = min_head_count(self.g.num_nodes(), &self.c);
                let fft = self.e.e_b() * (self.g.num_nodes() as f64 - 1.0) * self.e.fft_bytes;
                ResultRow {
                    energy_total: Some(self.lb),
                    fft_bytes: Some(fft),
                    eig_bytes: Some(self.lb - fft),
                    num_heads: Some(s),
                    gap_vs_lower_bound: Some(1.0),
                    ..ResultRow::empty(seed, alg, RowStatus::Bound)
                }
            }
            Algorithm::Centralized => {
                let total = centralized_baseline_energy(self.g, &self.spt, &self.e);
                ResultRow {
                    energy_total: Some(total),
                    fft_bytes: Some(total),
                    eig_bytes: Some(0.0),
                    num_heads: Some(1),
                    gap_vs_lower_bound: Some(total / self.lb),
                    ..ResultRow::empty(seed, alg, RowStatus::Baseline)
                }
            }
            Algorithm::IlpP1 => {
                let built = build_ilp_p1(self.g, &self.spt, &self.e, &self.c, P1Options::default());
                let (model, layout) = match built {
                    Ok(x) => x,
                    Err(e) => return ResultRow::empty(seed, alg, error_status(&e)),
                };
                match solve_milp(&model, secs(self.budgets.ilp_p1_seconds)) {
                    Ok(sol) if sol.status == Status::Optimal => match extract_plan_p1(&sol, &layout) {
                        Ok(plan) => self.plan_row(seed, alg, &plan, None, RowStatus::Optimal),
                        Err(_) => ResultRow::empty(seed, alg, RowStatus::Failed),
                    },
                    Ok(_) => ResultRow::empty(seed, alg, RowStatus::Infeasible),
                    Err(MilpError::TimeBudgetExceeded { best: Some(best), .. }) => {
                        match extract_plan_p1(&best, &layout) {
                            Ok(plan) => self.plan_row(seed, alg, &plan, None, RowStatus::TimeBudgetExceeded),
                            Err(_) => ResultRow::empty(seed, alg, RowStatus::TimeBudgetExceeded),
                        }
                    }
                    Err(MilpError::TimeBudgetExceeded { best: None, .. }) => {
                        ResultRow::empty(seed, alg, RowStatus::TimeBudgetExceeded)
                    }
                    Err(_) => ResultRow::empty(seed, alg, RowStatus::Failed),
                }
            }
            Algorithm::IlpP3 => self.tree_row(
                seed,
                alg,
                build_ddct_ilp(self.g, &self.c, secs(self.budgets.ilp_p3_seconds)),
                RowStatus::Optimal,
            ),
            Algorithm::Lpr => self.tree_row(seed, alg, lpr(self.g, &self.c).map(|o| o.tree), RowStatus::Heuristic),
            Algorithm::Daa => self.tree_row(seed, alg, daa(self.g, &self.c).map(|o| o.tree), RowStatus::Heuristic),
            Algorithm::MdctP2 => {
                if self.g.num_nodes() <= MDCT_EXACT_MAX_NODES {
                    let exact = build_mdct(
                        self.g,
                        MdctMode::Exact {
                            budget: secs(self.budgets.mdct_seconds),
                        },
                    );
                    if let Ok(t) = exact {
                        return self.tree_row(seed, alg, Ok(t), RowStatus::Optimal);
                    }
                }
                self.tree_row(seed, alg, build_mdct(self.g, MdctMode::Greedy), RowStatus::Heuristic)
            }
        }
    }
}

fn error_status(e: &Error) -> RowStatus {
    match e {
        Error::TimeBudgetExceeded { .. } => RowStatus::TimeBudgetExceeded,
        Error::Infeasible(_) | Error::Unattachable(_) | Error::Stalled { .. } => RowStatus::Infeasible,
        _ => RowStatus::Failed,
    }
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, g: &NetworkGraph) -> Result<Vec<ResultRow>> {
    let c = cfg.constraints.for_graph(g.num_nodes())?;
    let e = cfg.energy.params()?;
    let inst = Instance {
        g,
        spt: shortest_paths(g),
        lb: lower_bound_for(g, &c, &e),
        c,
        e,
        budgets: &cfg.budgets,
    };
    let mut rows = Vec::with_capacity(cfg.algorithms.len());
    for &alg in &cfg.algorithms {
        let start = Instant::now();
        let mut row = inst.run(seed, alg);
        if cfg.output.record_runtime {
            row.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Runs every selected algorithm on every seed. Failures of individual
/// algorithms become row statuses; seeds run in parallel and the rows come
/// back sorted by seed and algorithm name.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let fixed = match &cfg.topology.graph_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            Some(NetworkGraph::from_text(&text)?)
        }
        None => None,
    };
    let seeds = if cfg.topology.seeds.is_empty() {
        vec![0]
    } else {
        cfg.topology.seeds.clone()
    };
    let t = &cfg.topology;
    let per_seed: Vec<Result<Vec<ResultRow>>> = seeds
        .par_iter()
        .map(|&seed| match &fixed {
            Some(g) => run_seed(cfg, seed, g),
            None => {
                let g = generate_random_topology(seed, t.num_nodes, t.side, t.tx_range)?;
                run_seed(cfg, seed, &g)
            }
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| (a.seed, a.algorithm.name()).cmp(&(b.seed, b.algorithm.name())));
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record([
        "seed",
        "algorithm",
        "energy_total",
        "fft_bytes",
        "eig_bytes",
        "tree_height",
        "num_heads",
        "gap_vs_lower_bound",
        "runtime_ms",
        "status",
    ])
    .map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize()
        .map(|r| r.map_err(|e| Error::Config(format!("csv: {e}"))))
        .collect()
}

/// Writes `rows` to `path` as CSV with a header line.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Config(msg) => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(msg),
        },
        other => other,
    })
}

/// The two four-node examples: a chain, and a base with one child that has
/// two children of its own.
pub fn golden_graphs() -> Vec<(&'static str, NetworkGraph)> {
    vec![
        ("chain", NetworkGraph::path(4)),
        (
            "branch",
            NetworkGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)]).expect("connected"),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenLine {
    pub fixture: &'static str,
    pub centralized: f64,
    pub tree_solution: f64,
    pub closed_form: f64,
}

/// Centralized, tree-solution and closed-form energies on the golden graphs.
pub fn golden_report(e: &EnergyParams) -> Vec<GoldenLine> {
    golden_graphs()
        .into_iter()
        .map(|(name, g)| {
            let spt = shortest_paths(&g);
            let t = crate::trees::build_dct(&g);
            GoldenLine {
                fixture: name,
                centralized: centralized_baseline_energy(&g, &spt, e),
                tree_solution: plan_energy(&tree_solution(&t), &spt, e).expect("tree solutions are valid").total,
                closed_form: crate::plans::closed_form_tree_energy(&t, e).total,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dotted_keys() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            topology.num_nodes = 12
            topology.seeds = [1, 2, 3]
            energy.R_bytes = 4096
            constraints.n = 4
            algorithms = ["daa", "lower_bound"]
            output.record_runtime = true
            "#,
        )
        .unwrap();
        assert_eq!(cfg.topology.num_nodes, 12);
        assert_eq!(cfg.energy.fft_bytes, 4096.0);
        assert_eq!(cfg.constraints.n, NodeLimit::Uniform(4));
        assert_eq!(cfg.algorithms, vec![Algorithm::Daa, Algorithm::LowerBound]);
        assert!(cfg.output.record_runtime);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml_str("topology.bogus = 1").is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.algorithms.clear();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = ExperimentConfig::default();
        cfg.algorithms = vec![Algorithm::IlpP1];
        assert!(cfg.validate().is_err());
        cfg.topology.num_nodes = 5;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn per_node_limits() {
        let cfg = ExperimentConfig::from_toml_str("constraints.n = [3, 2, 2]\ntopology.num_nodes = 3").unwrap();
        assert_eq!(cfg.constraints.for_graph(3).unwrap().n, vec![3, 2, 2]);
    }

    #[test]
    fn golden_values() {
        let lines = golden_report(&EnergyParams::default());
        assert_eq!(lines[0].centralized, 49152.0);
        assert_eq!(lines[0].tree_solution, 24768.0);
        assert_eq!(lines[1].centralized, 40960.0);
        assert_eq!(lines[1].tree_solution, 24672.0);
    }

    #[test]
    fn csv_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "seed,algorithm,energy_total,fft_bytes,eig_bytes,tree_height,num_heads,gap_vs_lower_bound,runtime_ms,status\n"
        );
    }
}
