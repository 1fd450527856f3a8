//! Command-line driver: `blowup solve --config <path>`.
//!
//! Exit codes: 0 on success, 2 when a hypothesis gate stops the run
//! without `--override-hypotheses`, 1 on any configuration or compute
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use blowup::pipeline::RunStatus;

#[derive(Parser)]
#[command(name = "blowup", version, about = "Blow-up solutions of quasilinear p-Laplacian problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a JSON config file.
    Solve {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for profiles and the run report.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Proceed when hypothesis checks fail; results are marked as
        /// outside the verified-hypothesis regime.
        #[arg(long)]
        override_hypotheses: bool,
        /// Worker threads (default: BLOWUP_THREADS or all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { config, out, override_hypotheses, threads } => {
            let threads = threads.or_else(|| {
                std::env::var("BLOWUP_THREADS").ok().and_then(|v| v.parse().ok())
            });
            if let Some(k) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                    eprintln!("blowup: cannot configure {k} threads: {e}");
                    return ExitCode::from(1);
                }
            }
            let cfg = match blowup::load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("blowup: {e}");
                    return ExitCode::from(1);
                }
            };
            match blowup::run(&cfg, &out, override_hypotheses) {
                Ok(outcome) => {
                    println!("report: {}", outcome.report_path.display());
                    for w in &outcome.report.warnings {
                        eprintln!("warning: {w}");
                    }
                    for e in &outcome.report.errors {
                        eprintln!("error: {e}");
                    }
                    match outcome.status {
                        RunStatus::Success => ExitCode::SUCCESS,
                        RunStatus::HypothesisFailure => {
                            eprintln!(
                                "blowup: hypothesis checks failed; rerun with --override-hypotheses \
                                 to proceed anyway"
                            );
                            ExitCode::from(2)
                        }
                        RunStatus::ComputeError => ExitCode::from(1),
                    }
                }
                Err(e) => {
                    eprintln!("blowup: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
