mod experiments;
mod fit;
mod metrics;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::output::exit_code;

/// Covariance models for data on graph nodes.
#[derive(Parser)]
#[command(name = "graphcov", version, about)]
struct Cli {
    /// Worker threads for parallel experiments (defaults to all cores).
    #[arg(long, global = true, env = "GRAPHCOV_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a graph distance matrix and test whether it is Euclidean.
    Metrics(metrics::MetricsArgs),
    /// Fit the Gaussian or Poisson-GLM model by MCMC.
    Fit(fit::FitArgs),
    /// Draw synthetic data from the model.
    Simulate(experiments::SimulateArgs),
    /// Closest-in-class KL comparison against the CAR baselines.
    KlTable(experiments::KlTableArgs),
    /// Coverage, bias and RMSE of edge-weight estimates on lattices.
    SimStudy(experiments::SimStudyArgs),
    /// Test whether correlations along graph edges are all equal.
    HeteroTest(experiments::HeteroArgs),
    /// Standardized contrasts between fitted and geographic edge distances.
    Zscore(experiments::ZscoreArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    let result = match cli.command {
        Command::Metrics(a) => metrics::run(a),
        Command::Fit(a) => fit::run(a),
        Command::Simulate(a) => experiments::simulate(a),
        Command::KlTable(a) => experiments::kl_table(a),
        Command::SimStudy(a) => experiments::sim_study(a),
        Command::HeteroTest(a) => experiments::hetero_test(a),
        Command::Zscore(a) => experiments::zscore(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

