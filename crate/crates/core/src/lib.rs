//! Random shortest path metrics.
//!
//! Edge weights of the complete graph on `n` vertices are drawn i.i.d. from
//! Exp(1) (or U[0,1]); distances are the induced shortest-path lengths. The
//! crate provides the metric itself, closed-form evaluators for its ball and
//! growth-process laws, the Δ-ball clustering, the classic matching / TSP /
//! k-median heuristics with exact small-scale oracles, and a seeded,
//! reproducible experiment runner.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops that touch several parallel arrays read better as ranges
#![allow(clippy::needless_range_loop)]

pub mod analytics;
pub mod clustering;
pub mod error;
pub mod experiment;
pub mod heuristics;
pub mod kmedian;
pub mod metric;
pub mod oracles;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use metric::{BallProfile, Distribution, RandomMetric, WeightedGraph};
