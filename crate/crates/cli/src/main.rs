//! Batch experiment runner: one experiment per invocation, configured by a
//! JSON file and flags, writing JSON and CSV artifacts into `--out`.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use varlorentz::compactness::ClassifyParams;

use crate::config::{read_file, resolve, BernsteinConfig, GammaConfig, NormConfig, Overrides, RearrangeConfig};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "varlorentz", version, about = "Rearrangements, variable Lorentz norms and embedding diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config; its keys override the command's defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Overrides the config's `seed` (gamma, bernstein).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the parallel backend.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the config's `tol` (norm, gamma, bernstein).
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Distribution function, decreasing and symmetric rearrangements of a profile.
    Rearrange,
    /// Luxemburg and variable Lorentz norms of a profile.
    Norm,
    /// Compactness verdict with its evidence.
    Classify,
    /// Estimates of the localized extremal quotient over shrinking balls.
    Gamma,
    /// Builds the function system and samples the Bernstein lower bound.
    Bernstein,
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("warning: built without the parallel feature; running on one thread");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(tol) = cli.tol {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("--tol {tol} must be finite and non-negative")));
        }
    }
    let file = cli.config.as_deref().map(read_file).transpose()?;
    let overrides = Overrides { seed: cli.seed, tol: cli.tol };
    configure_threads(cli.threads)?;

    let outcome = match cli.command {
        Command::Rearrange => commands::rearrange(&resolve(&RearrangeConfig::default(), file, &overrides)?)?,
        Command::Norm => commands::norm(&resolve(&NormConfig::default(), file, &overrides)?)?,
        Command::Classify => {
            let defaults = ClassifyParams::new(1.0, 2, 1.0, 0.5, 0.1);
            commands::classify_command(&resolve(&defaults, file, &overrides)?)?
        }
        Command::Gamma => commands::gamma(&resolve(&GammaConfig::default(), file, &overrides)?)?,
        Command::Bernstein => commands::bernstein(&resolve(&BernsteinConfig::default(), file, &overrides)?)?,
    };

    outcome.artifacts.write_to(&cli.out)?;
    for name in outcome.artifacts.names() {
        eprintln!("wrote {}", cli.out.join(name).display());
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(outcome.failures.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
