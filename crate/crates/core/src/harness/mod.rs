//! Monte Carlo experiment engine: configuration, seeded trials, aggregation
//! and CSV output.

pub mod config;
pub mod experiment;
pub mod trial;

pub use config::{AlgorithmConfig, ScenarioConfig, SnrSetting};
pub use experiment::{run_experiment, write_csv, AggregateResult, AggregateRow, XKind};
pub use trial::{run_trial, AlgorithmTrace, TrialRecord};
