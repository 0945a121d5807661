//! Directed preferential attachment graphs: simulation, limit laws, and
//! estimation from timestamped edge lists.
//!
//! ```
//! use panet::graph::ModelParams;
//! use panet::sim::simulate_traditional;
//! use panet::theory::joint_limit_pmf;
//!
//! let params = ModelParams::traditional(0.2, 1.0, 1.0)?;
//! let (graph, _) = simulate_traditional(&params, 10_000, 1);
//! let share = graph.iter().filter(|&(_, i, o)| i == 0 && o == 1).count() as f64
//!     / graph.node_count() as f64;
//! assert!((share - joint_limit_pmf(&params, 0, 1)?).abs() < 0.05);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The guide in `book/` walks through each module.

// NaN inputs must fail these checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod estimators;
pub mod graph;
pub mod ingest;
pub mod quad;
pub mod sim;
pub mod stats;
pub mod theory;
pub mod verify;

pub use graph::{DegreeState, ModelParams, NodeId};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/limit-laws.md")]
    mod limit_laws {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
