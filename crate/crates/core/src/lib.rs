//! Sparse random factor-graph models: Bethe free entropy, thresholds and
//! exact finite-size oracles.

pub mod bethe;
pub mod error;
pub mod functionals;
pub mod exact;
pub mod graph;
pub mod mc;
pub mod measure;
pub mod model;
pub mod pinning;
pub mod rng;
pub mod simplex;
pub mod witness;
pub mod zoo;
pub mod stats;
pub mod thresholds;

pub use error::{Error, Result};
pub use model::{ModelSpec, WeightDistribution, WeightFunction};
pub use simplex::Simplex;
