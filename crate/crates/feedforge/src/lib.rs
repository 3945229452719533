//! Converts street-network geography into simulation-ready radial
//! distribution feeders: candidate-graph extraction and scoring, optimal
//! radial feeder synthesis, electrical parameter and load assignment,
//! sweep-based power flow validation, and multi-format export.
//!
//! The numeric core is generic over the scalar type through
//! [`scalar::Scalar`]; the pipeline, file formats and CLI use the `f64`
//! aliases exported at the crate root.

pub mod geograph;
pub mod config;
pub mod electrify;
pub mod export;
pub mod fixture;
pub mod metrics;
pub mod pipeline;
pub mod powerflow;
pub mod scalar;
pub mod synth;

pub use geograph::{NodeId, RoadClass};

/// Street graph in `f64`, as produced by ingestion.
pub type GeoGraph64 = geograph::GeoGraph<f64>;
/// Geographic point in `f64`.
pub type GeoPoint64 = geograph::GeoPoint<f64>;
/// Simplified candidate graph in `f64`.
pub type CandidateGraph64 = geograph::CandidateGraph<f64>;
/// Projection of the shared planar frame in `f64`.
pub type Projection64 = geograph::Projection<f64>;
/// Synthesis instance in `f64`.
pub type SynthesisProblem64 = synth::SynthesisProblem<f64>;
/// Synthesis result in `f64`.
pub type SynthesisSolution64 = synth::SynthesisSolution<f64>;
/// Rooted feeder tree in `f64`.
pub type FeederGraph64 = synth::FeederGraph<f64>;

pub type ElectricalNetwork64 = electrify::ElectricalNetwork<f64>;

pub type PowerFlowResult64 = powerflow::PowerFlowResult<f64>;
