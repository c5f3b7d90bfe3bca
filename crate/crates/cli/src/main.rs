mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use commands::Command;
use error::CliError;

/// Closed-form values, Monte Carlo checks and dual variational checks for
/// optimal investment with a look-ahead price signal.
#[derive(Debug, Parser)]
#[command(name = "peeklab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Override a configuration entry by dot path, e.g. `model.gamma=0.7`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for Monte Carlo runs; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,

    /// Exit with status 4 when a check exceeds its threshold.
    #[arg(long = "assert")]
    assert_thresholds: bool,

    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: &Args) -> Result<bool, CliError> {
    let env_seed = std::env::var("PEEKLAB_SEED").ok();
    let resolved = config::load(&args.config, &args.overrides, env_seed.as_deref())?;
    if let Some(n) = args.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let start = Instant::now();
    let outcome = commands::run(args.command, &resolved)?;
    let dir = args.out.clone().unwrap_or_else(|| resolved.config.output.dir.clone());
    let path = output::write(&dir, args.command, &resolved, &outcome)?;
    eprintln!(
        "{}: {} row(s) in {:.3}s -> {}",
        args.command.name(),
        outcome.rows.len(),
        start.elapsed().as_secs_f64(),
        path.display()
    );
    for b in &outcome.breaches {
        eprintln!("threshold breach: {b}");
    }
    Ok(outcome.breaches.is_empty())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if args.assert_thresholds => ExitCode::from(4),
        Ok(false) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
