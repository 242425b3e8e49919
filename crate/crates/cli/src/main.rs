use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ergodic_cli::commands::{self, Command};
use ergodic_cli::{parse_config, CliError, CliResult};

/// Numerical experiments on ergodic Schrödinger operators.
#[derive(Debug, Parser)]
#[command(name = "ergodic", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `out`, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main_inner(args: Args) -> CliResult<()> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    let out = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    commands::run(args.command, &cfg, &out)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ergodic: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
