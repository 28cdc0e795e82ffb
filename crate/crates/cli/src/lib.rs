//! Scenario runner for the plate and 3D elasticity solvers: reads a JSON
//! configuration, runs the solve and verification pipeline, and renders the
//! results as JSON, CSV or a text banner.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod snapshot;

pub use config::{Model, ScenarioConfig};
pub use error::{exit, CliError};
pub use report::{emit_report, ReportFormat, VerificationReport};
pub use run::{run_config, run_gradcheck, run_scenario, RunOutcome, Start};
pub use snapshot::Solution;
