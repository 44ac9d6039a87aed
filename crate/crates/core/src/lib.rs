//! Semi-discrete optimal transport with marginal-ambiguity smoothing.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod hardness;
pub mod measure;
pub mod noise;
pub mod solver;

pub use error::{Error, Result};
pub use measure::{CostSpec, DiscreteMeasure, Potential, SamplerSpec};
pub use noise::{MarginalModel, ModelKind};
