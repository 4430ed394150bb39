//! Evolution strategies with evolvability-aware selection.
//!
//! Three optimizers share one gradient-estimation pipeline and differ only in
//! how offspring are ranked before the weighted noise sum:
//!
//! * ES ranks by fitness.
//! * Evolvability ES ranks by each offspring's squared behavioral distance
//!   from the population mean.
//! * Quality Evolvability ES ranks by the NSGA-II order (non-dominated front,
//!   then crowding distance) over the (fitness, evolvability) pair.
//!
//! The [`environment`] module provides a deterministic point-mass locomotion
//! family to run them on, and [`oracle`] holds brute-force references used
//! to verify the fast paths.

pub mod checkpoint;
pub mod config;
pub mod environment;
pub mod error;
pub mod estimator;
pub mod optimizer;
pub mod oracle;
pub mod policy;
pub mod ranking;
pub mod records;
pub mod runner;
pub mod sampling;
pub mod seeds;
pub mod task;
pub mod types;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use estimator::ObjectiveMode;
pub use runner::{run_experiment, RunOptions, RunSummary, Runner};
pub use types::{BehaviorDescriptor, GenerationRecord, ParameterVector, SampleEvaluation, SearchDistribution};
