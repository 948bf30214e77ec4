use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use sparse_trees::cli::{run, CliError, Format, RunConfig, Subcommand};

/// Sparse-tree spectral toolkit: tree statistics, Jacobi decompositions,
/// EFGP dynamics and phase diagrams, driven by a JSON run configuration.
#[derive(Parser, Debug)]
#[command(name = "sparsetree", version)]
struct Args {
    /// Subcommand to run; overrides the config's `subcommand` field.
    #[arg(value_enum)]
    subcommand: Option<Subcommand>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn execute(args: Args) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if args.subcommand.is_some() {
        cfg.subcommand = args.subcommand;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if let Some(f) = args.format {
        cfg.format = Some(f);
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.display().to_string());
    }

    let start = Instant::now();
    let report = run(&cfg)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let bytes = report.emit(cfg.format.unwrap_or_default(), Some(elapsed));

    match &cfg.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| CliError::Io(format!("{path}: {e}"))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sparsetree: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
