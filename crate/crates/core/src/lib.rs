//! Self-configuring runtime for graph link-prediction workloads.
//!
//! * [`graph`]: edge-list ingestion and a deterministic superstep engine.
//! * [`linkpred`]: PageRank, Adamic-Adar, power iteration clustering,
//!   overlapping community detection and triangle detection, composed into
//!   the GC / OCD / RGD applications.
//! * [`gbdt`]: multiclass gradient-boosted trees and a CART baseline.
//! * [`scf`]: collect workload features, predict executors per node and
//!   recalculate execution properties under upper bounds.
//! * [`bench`]: run applications under a configuration and compare the
//!   default sizing against the self-configured one.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the CLI and benchmarks use.

pub mod bench;
pub mod error;
pub mod gbdt;
pub mod graph;
pub mod kv;
pub mod linkpred;
mod scalar;
pub mod scf;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GbdtModel = gbdt::GbdtModel<f64>;
pub type GbdtParams = gbdt::GbdtParams<f64>;
pub type RankVector = linkpred::RankVector<f64>;
pub type Affinity = linkpred::Affinity<f64>;
pub type CommunityMembership = linkpred::CommunityMembership<f64>;
pub type PicParams = linkpred::PicParams<f64>;
pub type AppParams = linkpred::AppParams<f64>;
pub type AppOutput = linkpred::AppOutput<f64>;
