//! Scenario-driven runner for woven c-fusion frame certificates.

pub mod complex;
pub mod error;
pub mod instance;
pub mod run;
pub mod scenario;

pub use error::{CliError, Result};
pub use run::{run_scenario, Report};
pub use scenario::Scenario;
