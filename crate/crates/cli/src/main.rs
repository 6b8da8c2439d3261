use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

#[derive(Parser)]
#[command(name = "delcap", version)]
#[command(about = "Exact checks and bound curves for deletion and deletion/substitution channels")]
struct Cli {
    /// RNG seed (recorded in every output header)
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Omit the timestamp header line so reruns are byte-identical
    #[arg(long, global = true)]
    deterministic: bool,

    /// Output file for CSV data (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the command's numeric tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Mixture {
    #[arg(long, default_value_t = 0.3)]
    lambda: f64,
    #[arg(long, default_value_t = 0.2)]
    d1: f64,
    #[arg(long, default_value_t = 0.5)]
    d2: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the two-channel mixture law with the single deletion channel
    VerifyLemma1 {
        /// Largest blocklength; every N from 1 up is checked
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Step of the (d1, d2, lambda) grid on [0, 1]
        #[arg(long, default_value_t = 0.25)]
        grid_step: f64,
    },
    /// Check the genie-aided information chain on random input laws
    VerifyGenie {
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Random input laws per parameter point (the uniform law is always added)
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0.3)]
        grid_step: f64,
    },
    /// Check the closed forms for the output-length law
    VerifyAppendix {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        grid_step: f64,
    },
    /// Simulate the mixture and compare output-length moments with the closed forms
    Simulate {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[command(flatten)]
        mixture: Mixture,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        /// Also run the per-input goodness-of-fit test (needs N <= 10)
        #[arg(long)]
        gof: bool,
    },
    /// Upper bound at the mixed deletion probability from two known bounds
    Combine {
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        #[command(flatten)]
        mixture: Mixture,
    },
    /// Improve a bound curve on a grid using the scale and pair rules
    Convexify {
        #[arg(long = "in")]
        input: PathBuf,
        /// `a:b:step`; defaults to the first anchor up to 1 in steps of 0.001
        #[arg(long)]
        grid: Option<String>,
    },
    /// Coefficient of the best (1-d) ray certified by a curve
    Coefficient {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Lower bounds on C(d) from exact finite-blocklength optimization
    FiniteN {
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Deletion probabilities as `a:b:step`
        #[arg(long, default_value = "0.1:0.9:0.1")]
        grid: String,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Upper curve to check the lower bounds against
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Plot data: input curve, improved curve and reference line
    Figure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Dump an exact channel law as x,y,probability
    Law {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        d: f64,
        /// BSC crossover after the deletions
        #[arg(long, default_value_t = 0.0)]
        s: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("{}", serde_json::json!({ "error": format!("{err:#}") }));
            ExitCode::from(2)
        }
    }
}
