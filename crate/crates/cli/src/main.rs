mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

/// Nelson-Siegel term-structure factors for commodity futures.
#[derive(Debug, Parser)]
#[command(name = "curvespread", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a futures market and write it to disk.
    Simulate(Common),
    /// Fit the curve model to every snapshot of a universe.
    Fit(Common),
    /// Run strategies end to end and write results plus reports.
    Run(Common),
    /// Regenerate the report tables of a run directory.
    Report {
        /// Run directory; defaults to --out.
        dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn run_config(&self) -> Result<RunConfig, CliError> {
        let path = self.config.as_ref().ok_or_else(|| CliError::Validation("--config is required".into()))?;
        let mut cfg = RunConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(threads) = self.threads {
            cfg.threads = threads;
        }
        Ok(cfg)
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    if threads == 0 {
        return Err(CliError::Validation("threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(c) => {
            let out = c.out.clone().ok_or_else(|| CliError::Validation("--out is required".into()))?;
            pool(c.threads.unwrap_or(1))?.install(|| commands::cmd_simulate(c.config.as_deref(), c.seed.unwrap_or(0), &out))
        }
        Command::Fit(c) => {
            let cfg = c.run_config()?;
            let out = commands::output_dir(c.out, Some(&cfg))?;
            pool(cfg.threads)?.install(|| commands::cmd_fit(&cfg, &out))
        }
        Command::Run(c) => {
            let cfg = c.run_config()?;
            let out = commands::output_dir(c.out, Some(&cfg))?;
            pool(cfg.threads)?.install(|| commands::cmd_run(&cfg, &out))
        }
        Command::Report { dir, common } => {
            let dir = dir.or(common.out).ok_or_else(|| CliError::Validation("report needs a run directory".into()))?;
            report::cmd_report(&dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
