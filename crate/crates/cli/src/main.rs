use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod compare;
mod fit;
mod output;
mod simulate;
mod theory;
mod verify;

/// Directed preferential attachment: simulation, limit laws and fitting.
#[derive(Parser)]
#[command(name = "panet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the traditional or Poisson model and write degree tables.
    Simulate(simulate::SimulateArgs),
    /// Evaluate the limiting joint, marginal or angular densities.
    Theory(theory::TheoryArgs),
    /// Fit (lambda, p, delta_in, delta_out) to a temporal edge list.
    Fit(fit::FitArgs),
    /// Simulate replicates from a fit and summarise them for comparison.
    Compare(compare::CompareArgs),
    /// Run one of the independent oracles and emit a JSON report.
    Verify(verify::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(&args),
        Command::Theory(args) => theory::run(&args),
        Command::Fit(args) => fit::run(&args),
        Command::Compare(args) => compare::run(&args),
        Command::Verify(args) => verify::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
