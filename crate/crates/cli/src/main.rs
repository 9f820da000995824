use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use shmnet_core::experiment::{
    emit_csv, golden_report, run_experiment, write_csv, Algorithm, ExperimentConfig, NodeLimit,
};
use shmnet_core::netmodel::generate_random_topology;

#[derive(Parser)]
#[command(name = "shmnet", version, about = "Energy-aware communication planning for sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random connected deployment and write it as a graph file.
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long = "num-nodes", default_value_t = 30)]
        num_nodes: usize,
        #[arg(long, default_value_t = 50.0)]
        side: f64,
        #[arg(long = "tx-range", default_value_t = 30.0)]
        tx_range: f64,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm on one graph file and print a CSV row.
    Solve {
        graph: PathBuf,
        #[arg(long, short)]
        algorithm: Algorithm,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Run a full experiment from a config file.
    Experiment {
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
        /// Comma-separated seeds or an inclusive range such as `1..20`.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<Seeds>,
        #[arg(long = "num-nodes")]
        num_nodes: Option<usize>,
        #[arg(long)]
        side: Option<f64>,
        #[arg(long = "tx-range")]
        tx_range: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<Algorithm>>,
    },
    /// Print the energies of the two four-node examples.
    Golden {
        #[arg(long = "R-bytes")]
        fft_bytes: Option<f64>,
        #[arg(long = "r-bytes")]
        eig_bytes: Option<f64>,
    },
}

/// Flags shared by `solve` and `experiment`; they override the config file.
#[derive(Args)]
struct Overrides {
    /// Uniform per-node cluster-size limit.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "n-a")]
    n_a: Option<usize>,
    #[arg(long = "R-bytes")]
    fft_bytes: Option<f64>,
    #[arg(long = "r-bytes")]
    eig_bytes: Option<f64>,
    #[arg(long = "e-tx")]
    e_tx: Option<f64>,
    #[arg(long = "e-rx")]
    e_rx: Option<f64>,
    /// Time budget in seconds applied to every exact solver.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long = "record-runtime")]
    record_runtime: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(n) = self.n {
            cfg.constraints.n = NodeLimit::Uniform(n);
        }
        if self.n_a.is_some() {
            cfg.constraints.n_a = self.n_a;
        }
        if let Some(v) = self.fft_bytes {
            cfg.energy.fft_bytes = v;
        }
        if let Some(v) = self.eig_bytes {
            cfg.energy.eig_bytes = v;
        }
        if let Some(v) = self.e_tx {
            cfg.energy.e_tx = v;
        }
        if let Some(v) = self.e_rx {
            cfg.energy.e_rx = v;
        }
        if let Some(s) = self.budget {
            cfg.budgets.ilp_p1_seconds = s;
            cfg.budgets.ilp_p3_seconds = s;
            cfg.budgets.mdct_seconds = s;
        }
        if self.csv.is_some() {
            cfg.output.csv = self.csv.clone();
        }
        if self.record_runtime {
            cfg.output.record_runtime = true;
        }
    }
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    parse_seed_list(s).map(Seeds)
}

fn parse_seed_list(s: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
        if a > b {
            return Err(format!("empty seed range {s}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|e| format!("bad seed `{x}`: {e}")))
        .collect()
}

fn emit(cfg: &ExperimentConfig) -> Result<()> {
    let rows = run_experiment(cfg)?;
    match &cfg.output.csv {
        Some(path) => emit_csv(&rows, path).with_context(|| format!("writing {}", path.display()))?,
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen {
            seed,
            num_nodes,
            side,
            tx_range,
            out,
        } => {
            let g = generate_random_topology(seed, num_nodes, side, tx_range)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, g.to_text()).with_context(|| format!("writing {}", path.display()))?
                }
                None => std::io::stdout().write_all(g.to_text().as_bytes())?,
            }
        }
        Command::Solve { graph, algorithm, opts } => {
            let mut cfg = ExperimentConfig::default();
            cfg.topology.graph_file = Some(graph);
            cfg.topology.seeds = vec![0];
            cfg.algorithms = vec![algorithm];
            opts.apply(&mut cfg);
            emit(&cfg)?;
        }
        Command::Experiment {
            config,
            opts,
            seeds,
            num_nodes,
            side,
            tx_range,
            algorithms,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = seeds {
                cfg.topology.seeds = s.0;
            }
            if let Some(v) = num_nodes {
                cfg.topology.num_nodes = v;
            }
            if let Some(v) = side {
                cfg.topology.side = v;
            }
            if let Some(v) = tx_range {
                cfg.topology.tx_range = v;
            }
            if let Some(a) = algorithms {
                cfg.algorithms = a;
            }
            opts.apply(&mut cfg);
            emit(&cfg)?;
        }
        Command::Golden { fft_bytes, eig_bytes } => {
            let mut e = shmnet_core::netmodel::EnergyParams::default();
            if let Some(v) = fft_bytes {
                e.fft_bytes = v;
            }
            if let Some(v) = eig_bytes {
                e.eig_bytes = v;
            }
            if e.validate().is_err() {
                bail!("invalid energy parameters");
            }
            println!("fixture,centralized,tree_solution,closed_form");
            for line in golden_report(&e) {
                println!(
                    "{},{},{},{}",
                    line.fixture, line.centralized, line.tree_solution, line.closed_form
                );
            }
        }
    }
    Ok(())
}
