use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use semiflow_cli::{run_command, Command, ExperimentConfig};

/// Numerical laboratory for expanding suspension semiflows.
#[derive(Parser)]
#[command(name = "semiflow", version)]
struct Args {
    command: Command,
    /// TOML configuration file.
    config: PathBuf,
    /// Output directory (overrides `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = args.out {
        cfg.out = out.to_string_lossy().into_owned();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    match run_command(args.command, &cfg) {
        Ok(outcome) => {
            println!("{} artifacts written to {}", outcome.artifacts.len(), outcome.out_dir.display());
            println!("config hash {}", outcome.config_hash);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
