use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tenantshare_cli::{load_config, run_experiment, validate, CliError, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(
    name = "tenantshare",
    version,
    about = "Simulate SLA-aware sharing of one resource among tenants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSVs and summary.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn validate_cmd(path: &Path) -> Result<(), CliError> {
    let config = load_config(path)?;
    let v = validate(&config, path.parent().unwrap_or(Path::new(".")))?;
    for d in &v.diagnostics {
        eprintln!("{d}");
    }
    let plan = v.into_plan()?;
    println!("ok");
    for p in &plan.policies {
        if let Some(params) = p.params {
            println!(
                "{}: lambda = {} (epsilon^2/(8N) with N = {})",
                p.label, params.lambda, plan.n
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(CliError::EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run { config, output_dir } => {
            run_experiment(config, output_dir.as_deref()).map(|r| print!("{}", r.summary.to_text()))
        }
        Command::Validate { config } => validate_cmd(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tenantshare: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
