use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fbg_stiffness::cli::{cmd_curve, cmd_estimate, cmd_simulate, RunReport};
use fbg_stiffness::config::RunConfig;
use fbg_stiffness::{Error, Execution};

#[derive(Parser)]
#[command(version, about = "Tissue stiffness from a buckling FBG beam")]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (`key = value` file)
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir`
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    /// Base seed; overrides `seed`
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run on one thread
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the post-buckling branch and export force and strain curves
    Curve,
    /// Synthesize indentation traces for every configured tissue and length
    Simulate,
    /// Estimate tissue modulus from trace files
    Estimate {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
}

fn run(args: Args) -> Result<RunReport, Error> {
    let path = args.config.ok_or_else(|| Error::InvalidInput("--config is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let exec = if args.sequential { Execution::Sequential } else { Execution::Parallel };
    match args.command {
        Command::Curve => cmd_curve(&cfg, &out, exec),
        Command::Simulate => cmd_simulate(&cfg, &out, exec),
        Command::Estimate { traces } => cmd_estimate(&cfg, &traces, &out, exec),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(args) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.failures {
                eprintln!("failed: {f}");
            }
            for p in &report.written {
                println!("{}", p.display());
            }
            if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
