use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diagsre::error::Error;

mod commands;
mod manifest;

#[derive(Debug, Parser)]
#[command(
    name = "diagsre",
    version,
    about = "Tail analysis of diagonal stochastic recurrence equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the per-coordinate tail indices of a model file.
    Alpha { config: PathBuf },
    /// Simulate a model file and write exceedances and marginal tails.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Also write the raw trajectory (short runs only).
        #[arg(long)]
        dump: bool,
        /// Forward steps kept after each exceedance.
        #[arg(long, default_value_t = 1)]
        horizon: usize,
    },
    /// Reproduce one of the six reference figures.
    Figures {
        /// Figure number, 1 to 6.
        #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
        which: u8,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Asymptotic independence diagnostics for a pair of coordinates.
    Diagnose {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Coordinates to compare.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0usize, 1])]
        pair: Vec<usize>,
        /// Quantile grid of the joint exceedance curve.
        #[arg(long, value_delimiter = ',', default_values_t = [0.99, 0.999, 0.9999])]
        grid: Vec<f64>,
        /// Monte Carlo draws for the tilted drift cross-check.
        #[arg(long, default_value_t = 200_000)]
        mc_samples: usize,
        /// Also run the first-passage simulation.
        #[arg(long)]
        first_passage: bool,
        #[arg(long, default_value_t = diagsre::diagnostics::DEFAULT_REPLICAS)]
        replicas: usize,
        /// Window constant C of the first-passage check.
        #[arg(long, default_value_t = diagsre::diagnostics::DEFAULT_WINDOW_C)]
        window_c: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Observations after burn-in (default: the config value, or 1e7).
    #[arg(long)]
    pub length: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Tail probability of the radius threshold.
    #[arg(long, default_value_t = diagsre::study::DEFAULT_TAIL)]
    pub quantile: f64,
    #[arg(long, default_value_t = diagsre::vsrv::DEFAULT_BINS)]
    pub bins: usize,
    /// Angles of absolute values on [0, pi/2] (default).
    #[arg(long, overrides_with = "signed")]
    pub absolute: bool,
    /// Signed angles on [-pi/2, pi/2].
    #[arg(long, overrides_with = "absolute")]
    pub signed: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Simulate even when the stationarity check fails.
    #[arg(long)]
    pub force: bool,
    #[arg(long, default_value = "out")]
    pub outdir: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 3,
        Error::InsufficientExceedances { .. }
        | Error::WindowTooShort { .. }
        | Error::DegenerateSample
        | Error::PassageTimeout { .. } => 4,
        Error::Io(_) | Error::InvalidArgument(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // keep exit code 2 for invalid models
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Alpha { config } => commands::alpha(&config),
        Command::Simulate {
            config,
            run,
            dump,
            horizon,
        } => commands::simulate(&config, &run, dump, horizon),
        Command::Figures { which, run } => commands::figures(which, &run),
        Command::Diagnose {
            config,
            run,
            pair,
            grid,
            mc_samples,
            first_passage,
            replicas,
            window_c,
        } => {
            let opts = commands::DiagnoseOptions {
                pair: (pair[0], pair[1]),
                grid,
                mc_samples,
                first_passage,
                replicas,
                window_c,
            };
            commands::diagnose(&config, &run, &opts)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::InsufficientExceedances { .. } = e {
                eprintln!("hint: use a longer run; the default tail 1e-5 needs --length 10000000 or more");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
