use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ionflow_cli::config::load_config;
use ionflow_cli::error::{exit, CliError};
use ionflow_cli::runner::{diagnose, run_file, spectrum};
use ionflow_cli::sweep::{parse_axis, sweep, SweepOptions};

/// Pseudo-spectral Nernst–Planck–Euler / Nernst–Planck–Darcy simulator.
///
/// Exit codes: 0 success, 1 invalid config or arguments, 2 divergence,
/// 3 I/O or data error.
#[derive(Debug, Parser)]
#[command(name = "ionflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a config end to end.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Steps between diagnostic reports.
        #[arg(long)]
        cadence: Option<usize>,
    },
    /// Recompute diagnostics from the snapshots of a run directory.
    Diagnose {
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump shell spectra and radius fits of a run directory.
    Spectrum {
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
        /// Single snapshot instead of all stored ones.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Cartesian sweep over config keys.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `key=v1,v2,...`, e.g. `species[*].D=0.5,1` or `n=32,64`.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        /// Skip points already recorded in the manifest.
        #[arg(long)]
        resume: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        cadence: Option<usize>,
    },
    /// Parse and validate a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run { config, out, cadence } => {
            let report = run_file(&config, out, cadence)?;
            if report.diverged() {
                return Ok(exit::DIVERGENCE);
            }
            println!("completed {} steps to t = {}", report.steps, report.final_time);
        }
        Command::Diagnose { out } => {
            let r = diagnose(&out)?;
            println!("recomputed diagnostics from {} snapshots into {}", r.snapshots, out.join("diagnose").display());
        }
        Command::Spectrum { out, snapshot } => {
            let dir = spectrum(&out, snapshot.as_deref())?;
            println!("wrote {}", dir.display());
        }
        Command::Sweep {
            config,
            out,
            axes,
            resume,
            workers,
            cadence,
        } => {
            let axes = axes.iter().map(|a| parse_axis(a)).collect::<Result<Vec<_>, _>>()?;
            let s = sweep(&SweepOptions {
                config,
                out,
                axes,
                resume,
                workers,
                cadence,
            })?;
            println!(
                "{} points: {} completed, {} diverged, {} invalid, {} failed, {} skipped",
                s.points, s.completed, s.diverged, s.invalid, s.failed, s.skipped
            );
            return Ok(s.exit_code());
        }
        Command::Validate { config } => {
            load_config(&config)?;
            println!("{}: ok", config.display());
        }
    }
    Ok(exit::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::VALIDATION as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
