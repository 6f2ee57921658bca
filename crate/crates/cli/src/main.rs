//! `tunelab`: run, tune and compare metaheuristics on discrete surrogates.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Failure, USAGE};
use crate::config::Overrides;

#[derive(Parser)]
#[command(name = "tunelab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assess the [method] configuration with N seeded runs.
    Run(Common),
    /// Tune the [grid] with strategy 1 or 2 and validate the result.
    Tune(Common),
    /// Enumerate the whole space and report its minimum.
    Oracle(Common),
    /// Compare every report.json found under a results directory.
    Report {
        dir: PathBuf,
        /// Where to write the comparison charts; defaults to DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Master seed, replacing campaign.master_seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    strategy: Option<u8>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            strategy: self.strategy,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run(c) => commands::run(&c.config, &c.overrides()),
        Command::Tune(c) => commands::tune(&c.config, &c.overrides()),
        Command::Oracle(c) => commands::oracle(&c.config, &c.overrides()),
        Command::Report { dir, out } => commands::report(dir, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
