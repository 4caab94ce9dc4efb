use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod corpus;

use commands::Context;

/// Finite groupoid algebras, quantum Markov kernels and Cramer-Rao bounds.
#[derive(Parser, Debug)]
#[command(name = "ncp", version, about)]
struct Cli {
    /// Tolerance for state, kernel and PSD checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Finite-difference step for parameter derivatives.
    #[arg(long, global = true, default_value_t = 1e-5)]
    h: f64,

    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for randomized corpus generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check any file against its axioms; exit 0 iff it passes.
    Validate { file: PathBuf },
    /// Compose two kernels (first k1, then k2).
    Compose {
        k1: PathBuf,
        k2: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Push a state forward through a kernel.
    Push {
        state: PathBuf,
        kernel: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pull an observable back through a kernel.
    Pull {
        kernel: PathBuf,
        observable: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a state through a chain of kernels with a per-stage report.
    Pipeline { config: PathBuf },
    /// GNS dimension, ideal dimension and Gram spectrum of a state.
    Gns { state: PathBuf },
    /// Fisher metric of a model at its base point.
    Fisher { model: PathBuf },
    /// Cramer-Rao bound of a model, with an audit of an optional estimator.
    Crb {
        model: PathBuf,
        #[arg(long)]
        estimator: Option<PathBuf>,
    },
    /// Complete-positivity verdict of a kernel between pair groupoids.
    Cp { kernel: PathBuf },
    /// Write a deterministic fixture corpus into a directory.
    Corpus { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Context {
        tol: cli.tol,
        h: cli.h,
        json: cli.json,
    };
    let result = match cli.command {
        Command::Validate { file } => commands::validate(&ctx, &file),
        Command::Compose { k1, k2, output } => commands::compose(&ctx, &k1, &k2, output.as_deref()),
        Command::Push {
            state,
            kernel,
            output,
        } => commands::push(&ctx, &state, &kernel, output.as_deref()),
        Command::Pull {
            kernel,
            observable,
            output,
        } => commands::pull(&ctx, &kernel, &observable, output.as_deref()),
        Command::Pipeline { config } => commands::pipeline(&ctx, &config),
        Command::Gns { state } => commands::gns(&ctx, &state),
        Command::Fisher { model } => commands::fisher(&ctx, &model),
        Command::Crb { model, estimator } => commands::crb(&ctx, &model, estimator.as_deref()),
        Command::Cp { kernel } => commands::cp(&ctx, &kernel),
        Command::Corpus { dir } => corpus::write_corpus(&ctx, &dir, cli.seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            if ctx.json {
                commands::print_json(&e.to_json());
            }
            ExitCode::from(e.class.exit_code() as u8)
        }
    }
}
