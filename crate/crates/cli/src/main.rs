//! `skewflow <COMMAND> <CONFIG>`: batch front end for skewflow-core.
//!
//! Exit status: 0 pass, 1 validation failure, 2 usage or configuration
//! error, 3 I/O error.

mod config;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::{parse_config, ConfigErrors, ConfigIssue};
use crate::error::CliError;
use crate::run::{Command, Context, Verdict};

/// Environment variable overriding the configured seed.
const SEED_VAR: &str = "SKEWFLOW_SEED";

#[derive(Debug, Parser)]
#[command(name = "skewflow", version, about = "Skew diffusions with local time on moving interfaces")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    config: PathBuf,
    /// Directory for relative output paths.
    #[arg(short, long, default_value = ".")]
    out_dir: PathBuf,
    /// Cap on worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<Verdict, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    }
    let text =
        std::fs::read_to_string(&cli.config).map_err(|source| CliError::Io { path: cli.config.clone(), source })?;
    let mut parsed = parse_config(&text)?;
    if let Ok(raw) = std::env::var(SEED_VAR) {
        parsed.config.seed = raw.trim().parse().map_err(|_| {
            ConfigErrors(vec![ConfigIssue {
                path: format!("${SEED_VAR}"),
                message: format!("not an unsigned integer: {raw:?}"),
            }])
        })?;
    }
    run::run(cli.command, &parsed, &Context { out_dir: cli.out_dir.clone() })
}
