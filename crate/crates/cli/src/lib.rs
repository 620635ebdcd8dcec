//! Scenario files in, reproducible tables and plots out.

pub mod emit;
pub mod error;
pub mod run;
pub mod scenario;

pub use error::{CliError, Result};
pub use run::{run_scenario, ResultBundle, RunOptions};
pub use scenario::{parse_scenario, Command, RawScenario, ScenarioConfig};
