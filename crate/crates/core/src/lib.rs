//! Nested Dirichlet process inference for row-exchangeable categorical
//! arrays by sequential imputation, with an exact partition-enumeration
//! oracle for small problems.

pub mod datasets;
pub mod dirichlet;
pub mod error;
pub mod functional;
pub mod gamer;
pub mod imputation;
pub mod io;
pub mod kde;
pub mod model;
pub mod oracle;
pub mod posterior;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use datasets::{load_scenario, Scenario};
pub use dirichlet::{CountVector, SimplexVector};
pub use error::{NdpError, Result};
pub use functional::{Functional, VectorFunctional};
pub use gamer::GamerParams;
pub use imputation::{
    ess, run_batch, trim_heaviest, EffectiveSampleSize, EngineOptions, SimulationBatch, WeightedSimulation,
};
pub use kde::{kde, scott_bandwidth, Bandwidth, GridSpec, KdeCurve};
pub use model::{ModelConfig, ObservationArray};
pub use oracle::{enumerate_posterior, PartitionPosterior};
pub use posterior::{expectation, law_of, new_agent_law, probability_below, LawOptions, WeightedSampleLaw};
