//! `cbi`: conservative confidence in a pfd bound after failure-free testing
//! with doubts about independence.

mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Axis, CommonArgs, LogRange};

#[derive(Debug, Parser)]
#[command(name = "cbi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One assessment, printed as a CSV row
    Assess {
        #[command(flatten)]
        common: CommonArgs,
        /// Report only the i.i.d. posterior (allows n < 2)
        #[arg(long)]
        iid_only: bool,
    },
    /// Assessments along one axis, one CSV row per value
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        axis: Option<Axis>,
        /// Explicit axis values
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        /// Log-spaced axis values as `FROM,TO,POINTS`
        #[arg(long, value_name = "FROM,TO,POINTS")]
        logspace: Option<LogRange>,
    },
    /// Cut-points and certificates over a grid of n
    Cutpoints {
        #[command(flatten)]
        common: CommonArgs,
        /// Explicit n values
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        /// Log-spaced n values as `FROM,TO,POINTS`
        #[arg(long, value_name = "FROM,TO,POINTS")]
        logspace: Option<LogRange>,
    },
    /// Both g curves on a uniform grid for one n
    Gdump {
        #[command(flatten)]
        common: CommonArgs,
        /// Grid points, ends included
        #[arg(long)]
        points: Option<usize>,
        /// Right end of the grid [default: 5 max(x_l, x_u), at most 1]
        #[arg(long)]
        x_max: Option<f64>,
    },
    /// Simulated demand chains, or a Monte Carlo likelihood with --runs
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Marginal failure probability
        #[arg(long)]
        x: Option<f64>,
        /// Probability of failure following a failure
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        chains: Option<usize>,
        /// Estimate the failure-free likelihood from this many chains
        #[arg(long)]
        runs: Option<u64>,
    },
    /// Run the oracle suite and report measured gaps
    OracleCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Monte Carlo chains per lattice point
        #[arg(long)]
        runs: Option<u64>,
    },
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
    let outcome = match cli.command {
        Command::Assess { common, iid_only } => commands::assess(&common, iid_only),
        Command::Sweep {
            common,
            axis,
            values,
            logspace,
        } => commands::sweep(&common, axis, values, logspace),
        Command::Cutpoints {
            common,
            values,
            logspace,
        } => commands::cutpoints(&common, values, logspace),
        Command::Gdump {
            common,
            points,
            x_max,
        } => commands::gdump(&common, points, x_max),
        Command::Simulate {
            common,
            x,
            lambda,
            chains,
            runs,
        } => commands::simulate(&common, x, lambda, chains, runs),
        Command::OracleCheck { common, runs } => commands::oracle_check(&common, runs),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cbi: {e}");
            e.exit_code()
        }
    }
}
