//! Fleet-aware structured pruning.
//!
//! Devices of one hardware SKU still differ in speed. This crate groups a
//! fleet into performance clusters from benchmark latencies, trains one
//! boosted-tree latency surrogate per cluster, and searches per-layer
//! pruning ratios that minimize the estimated fleet-average latency under
//! an accuracy constraint.
//!
//! The numeric kernels ([`cluster::dbscan`], [`surrogate::fit_gbrt`],
//! [`search::ncs_minimize`], [`search::bhattacharyya`]) are generic over
//! [`Scalar`]; the aliases below pin them to `f64` or `f32`.

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod error;
pub mod fleet;
pub mod model_space;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod surrogate;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Gbrt = surrogate::GbrtEnsemble<f64>;
pub type Gbrt32 = surrogate::GbrtEnsemble<f32>;
pub type Tree = surrogate::RegressionTree<f64>;
pub type Tree32 = surrogate::RegressionTree<f32>;
pub type Suite = surrogate::SurrogateSuite<f64>;
pub type Suite32 = surrogate::SurrogateSuite<f32>;
pub type Training = surrogate::TrainingSet<f64>;
pub type Training32 = surrogate::TrainingSet<f32>;
pub type NcsResult = search::NcsOutcome<f64>;
pub type NcsResult32 = search::NcsOutcome<f32>;
