use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hybrid_radiance_cli::{execute, parse_config, CliError, CliResult, Command, Format};

/// Collective radiance of trapped emitter chains with quantized motion.
#[derive(Debug, Parser)]
#[command(name = "hybrid-radiance", version)]
struct Args {
    /// One of kernels, two-atom, spectrum, band, entropy-scan, evolve, find-d0.
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output.path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for scan points (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output format; overrides output.format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn run(args: Args) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::config("", format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text, Some(args.command))?;
    if let Some(out) = args.out {
        cfg.output.path = out.display().to_string();
    }
    if let Some(format) = args.format {
        cfg.output.format = format;
    }
    if let Some(k) = args.workers {
        if k == 0 {
            return Err(CliError::config("--workers", "need at least one worker"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::config("--workers", e.to_string()))?;
    }
    for path in execute(&cfg)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
