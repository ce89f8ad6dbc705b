//! `longrange`: batch front end for the percolation, rearrangement and
//! estimation code in the `longrange` library.
//!
//! Every command is deterministic given its flags and `--seed`. Replicas run
//! on a rayon pool sized by `--workers`, and rows are always emitted in
//! replica order, so the worker count never changes the output bytes.

mod brw;
mod error;
mod estimate;
mod output;
mod sim;
mod theory;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "longrange", version, about, disable_help_subcommand = true)]
struct Cli {
    /// Worker threads for replica parallelism (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate u(c), theta(c), Borel-Tanner probabilities or the inverse of u.
    Theory(theory::TheoryArgs),
    /// Simulate the percolation graph G(t) on the n-cycle.
    SimGraph(sim::GraphArgs),
    /// Simulate random L-transpositions and their cycle counts.
    SimTranspositions(sim::TranspositionArgs),
    /// Simulate random L-reversals of a signed gene order.
    SimReversals(sim::ReversalArgs),
    /// Estimate the number of rearrangements behind a gene order.
    Estimate(estimate::EstimateArgs),
    /// Search orientations of an unsigned gene order minimising delta-hat.
    SignSearch(estimate::SignSearchArgs),
    /// Branching random walk survival experiments.
    Brw(brw::BrwArgs),
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Theory(a) => theory::run(a),
        Command::SimGraph(a) => sim::run_graph(a),
        Command::SimTranspositions(a) => sim::run_transpositions(a),
        Command::SimReversals(a) => sim::run_reversals(a),
        Command::Estimate(a) => estimate::run_estimate(a),
        Command::SignSearch(a) => estimate::run_sign_search(a),
        Command::Brw(a) => brw::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.workers {
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Usage(format!("worker pool: {e}")))
            .and_then(|pool| pool.install(|| run(cli.command))),
        None => run(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
