//! Config-driven experiments: parse a JSON configuration, run a scenario,
//! and render `spectrum.csv`, `report.json` and `sweep.csv`.

pub mod config;
pub mod output;
pub mod run;

pub use config::{schema, validate, with_scenario, ConfigIssue, ExperimentConfig, Scenario};
pub use output::{render, Artifacts};
pub use run::{execute, execute_in_order, RunResult};
