//! Experiment runner: reads a TOML config, simulates the listed policies on
//! one workload, and writes metric CSVs plus a `summary` file.

pub mod config;
pub mod error;
pub mod experiment;

pub use config::{load_config, parse_config, validate, Diagnostic, ExperimentConfig, Plan, Severity, Validation};
pub use error::CliError;
pub use experiment::{execute, parse_summary, run_experiment, write_outputs, ExperimentResult, RunSummary};

/// Environment variable that overrides the config's output directory.
pub const OUTPUT_DIR_ENV: &str = "TENANTSHARE_OUTPUT_DIR";
