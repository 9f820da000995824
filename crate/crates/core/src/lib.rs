//! Communication planning for distributed modal analysis in wireless sensor
//! networks.
//!
//! Each sensor produces an FFT of `R` bytes; cluster heads run an SVD over
//! the FFTs they collect and forward eigenvectors of `r` bytes to the base
//! station (node 0). The crate finds plans that keep the total radio energy
//! low under per-node cluster-size limits:
//!
//! - [`netmodel`]: graphs, random deployments, shortest paths.
//! - [`trees`]: shortest-path trees and their degree-constrained variants.
//! - [`plans`]: energy accounting, tree solutions and lower bounds.
//! - [`milp_models`]: exact integer programs.
//! - [`approx`]: LP rounding and the modified Dijkstra heuristic.
//! - [`annealing`]: cluster planning for parallel simulated annealing.
//! - [`experiment`]: seeded batch runs and CSV output.
//!
//! ```
//! use shmnet_core::netmodel::{shortest_paths, EnergyParams, NetworkGraph};
//! use shmnet_core::plans::{plan_energy, tree_solution};
//! use shmnet_core::trees::build_dct;
//!
//! let g = NetworkGraph::path(4);
//! let plan = tree_solution(&build_dct(&g));
//! let energy = plan_energy(&plan, &shortest_paths(&g), &EnergyParams::default()).unwrap();
//! assert_eq!(energy.total, 3.0 * 8192.0 + 6.0 * 32.0);
//! ```

pub mod annealing;
pub mod approx;
mod error;
pub mod experiment;
pub mod milp_models;
pub mod netmodel;
pub mod plans;
pub mod trees;

pub use error::{Error, Result};
