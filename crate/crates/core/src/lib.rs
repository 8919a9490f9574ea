//! Semi-streaming matching toolkit for general (non-bipartite) graphs.
//!
//! Two top-level pipelines are provided:
//!
//! - [`construct::stream_match`] builds a `(1 - eps)`-approximate maximum
//!   weighted matching by solving a perturbed odd-set packing LP with
//!   laminar-family oracles driven by minimum odd cuts.
//! - [`estimate::estimate_mcm`] / [`estimate::estimate_mwm`] estimate the
//!   matching size from the dual covering LP using cut sparsification and
//!   Johnson-Lindenstrauss sketches of the odd-set dual variables.
//!
//! Everything runs over a replayable [`graph::EdgeStream`] with explicit
//! pass and peak-space accounting.

pub mod config;
pub mod error;
pub mod exact;
pub mod flow;
pub mod frameworks;
pub mod graph;
pub mod sketch;
pub mod sparsify;

pub mod construct;
pub mod estimate;

pub mod cli;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeStream, ResourceLedger};
