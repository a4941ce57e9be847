use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wco_cli::commands::{self, ClassifyArgs, EigenArgs, NormalityArgs, ReproduceArgs, SpectrumArgs, UciArgs};
use wco_cli::exit_code;

#[derive(Parser)]
#[command(name = "wco", version, about = "Spectral toolkit for weighted composition operators on H2")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "WCO_WORKERS")]
    workers: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true, env = "WCO_OUT_DIR", default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denjoy-Wolff point, multiplier and class of a self-map (JSON on stdout).
    Classify(ClassifyArgs),
    /// Uniform convergence certificate for the iterates.
    Uci(UciArgs),
    /// Predicted spectrum, matrix eigenvalues and pseudospectrum on a grid.
    Spectrum(SpectrumArgs),
    /// Series eigenfunction certificate and lifted eigenpairs.
    Eigen(EigenArgs),
    /// Self-commutator and orthogonality probes.
    Normality(NormalityArgs),
    /// Run the reference example suite and write the pass/fail table.
    ReproducePaper(ReproduceArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(1);
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool is configured once");
    }
    let result = match &cli.command {
        Command::Classify(a) => commands::classify(a),
        Command::Uci(a) => commands::uci(a, &cli.out),
        Command::Spectrum(a) => commands::spectrum(a, &cli.out),
        Command::Eigen(a) => commands::eigen(a, &cli.out),
        Command::Normality(a) => commands::normality(a, &cli.out),
        Command::ReproducePaper(a) => commands::reproduce(a, &cli.out),
    };
    match result {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
