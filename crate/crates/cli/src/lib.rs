//! Configuration, scenario orchestration and report files for the
//! `lindblad-lightcone` command.

pub mod config;
pub mod runner;
pub mod svg;

pub use config::{parse_config, ConfigErrors, RunConfig, Scenario, DEFAULT_CONFIG};
pub use runner::{build_model, run_scenario, Check, RunError, RunSummary};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "LINDBLAD_LIGHTCONE_THREADS";

/// Output directory used when neither the command line nor the
/// configuration names one.
pub const DEFAULT_OUTPUT_DIR: &str = "lightcone-output";
