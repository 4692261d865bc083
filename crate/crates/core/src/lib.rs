//! Deterministic simulator and analysis toolkit for hierarchical federated
//! learning with quantized aggregation (Hier-Local-QSGD).
//!
//! The crate is organized around the training loop in [`engine`], the
//! unbiased compressors in [`quantizer`], the loss/oracle definitions in
//! [`model`], the closed-form convergence machinery in [`bound`], the
//! loss-driven interval controller in [`adaptive`], the wall-clock model in
//! [`latency`], and the experiment harness in [`config`]/[`harness`].

pub mod adaptive;
pub mod bound;
pub mod config;
pub mod engine;
pub mod error;
pub mod harness;
pub mod latency;
pub mod model;
pub mod quantizer;
pub mod rng;
pub mod topology;
pub mod trace;
pub mod vector;

pub use adaptive::AdaptiveSettings;
pub use bound::BoundParams;
pub use config::ExperimentConfig;
pub use engine::{EngineConfig, Schedule};
pub use error::{Error, Result};
pub use latency::LatencyModel;
pub use model::LossModel;
pub use quantizer::QuantizerSpec;
pub use rng::{RngStream, StreamLabel};
pub use topology::{EdgeWeighting, Topology};
pub use trace::{RoundRecord, RunTrace};
pub use vector::ParamVector;
