//! `ckmc`: model checking knowledge and coordination over interpreted
//! systems stored as JSON files.
//!
//! Reports go to stdout as JSON, summaries to stderr. Exit status is 0 when
//! the command ran and every assertion held, 1 when an assertion or
//! verification failed, and 2 on usage or input errors.

mod commands;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "ckmc",
    version,
    about = "Epistemic model checker for interpreted systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a formula at a point, or list its extension.
    Check {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        formula: String,
        /// Point as RUN:TIME.
        #[arg(long)]
        at: Option<String>,
        /// Expected value; without --at, true means valid and false means
        /// satisfied nowhere.
        #[arg(long = "assert", value_name = "true|false")]
        expect: Option<bool>,
    },
    /// Print the set of points where a formula holds.
    Extension {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        formula: String,
    },
    /// Check an ensemble file for coordination and nontriviality.
    Ensemble {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long, default_value = "perfect", value_name = "perfect|eps:N|eventual")]
        mode: String,
    },
    /// Test for temporal imprecision.
    Imprecision {
        #[arg(long)]
        system: PathBuf,
        /// Also search this group for a nontrivial perfectly coordinated ensemble.
        #[arg(long)]
        group: Option<String>,
    },
    /// Verify one of the correspondence claims on a system.
    Verify {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum)]
        claim: Claim,
        #[arg(long)]
        group: String,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long)]
        eps: Option<u32>,
        /// Ensemble to use for the (b) direction instead of generated ones.
        #[arg(long)]
        ensemble: Option<PathBuf>,
    },
    /// Analyze a coordinated attack system.
    Attack {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value = "perfect", value_name = "perfect|eps:N|eventual")]
        mode: String,
    },
    /// Generate a scenario system file.
    Scenario {
        #[command(subcommand)]
        scenario: Scenario,
    },
    /// Print the per-time log of one run.
    Transcript {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        run: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Claim {
    Prop1,
    Prop3,
    PropEventual,
    Cor3,
    Prop2,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Coarse,
    Fine,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Write the system here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Scenario {
    /// Muddy children.
    Muddy {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "coarse")]
        variant: Variant,
        /// Questions asked; defaults to n.
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = 1)]
        delay_min: u32,
        #[arg(long, default_value_t = 2)]
        delay_max: u32,
        #[arg(long, default_value_t = ckmc_core::scenarios::muddy::DEFAULT_MAX_RUNS)]
        max_runs: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Alice sends Bob one message with delivery within eps.
    Alicebob {
        #[arg(long)]
        eps: u32,
        #[arg(long)]
        max_send: u32,
        /// Defaults to max_send + 3*eps.
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long)]
        timestamped: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Coordinated attack under a built-in or file protocol.
    Attack {
        /// never, ack:K, bounded-eps, or a protocol JSON file.
        #[arg(long)]
        protocol: String,
        /// Delivery bound for bounded-eps.
        #[arg(long, default_value_t = 1)]
        eps: u32,
        #[command(flatten)]
        output: Output,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(outcome) => {
            // a closed pipe on stdout is not an error worth reporting
            let _ = writeln!(io::stdout().lock(), "{}", outcome.json);
            if let Some(summary) = outcome.summary {
                eprintln!("{summary}");
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
