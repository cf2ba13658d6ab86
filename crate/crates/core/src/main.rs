use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use bvlaw::harness::{self, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "bvlaw", version, about = "Scalar balance-law solver and estimate checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Tolerances {
    /// Relative tolerance for the verdict.
    #[arg(long)]
    tolerance_rel: Option<f64>,
    /// Absolute tolerance for the verdict (default 4h times the data scale).
    #[arg(long)]
    tolerance_abs: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Run at scales k and 2k instead of the scenario's list.
        #[arg(long)]
        resolution_scale: Option<usize>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Run every scenario file in a directory.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        resolution_scale: Option<usize>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Convergence table over dyadic scales, e.g. `--resolution-scale 1,2,4`.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        resolution_scale: Vec<usize>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Print W_N, ω_N, C₁, M₁ for N = 1..max.
    Constants {
        #[arg(long, default_value_t = 8)]
        max_dimension: usize,
        #[arg(long, default_value_t = 0.5)]
        plateau_radius: f64,
    },
}

fn options(resolution_scale: Option<usize>, tol: &Tolerances) -> RunOptions {
    RunOptions { resolution_scale, tolerance_rel: tol.tolerance_rel, tolerance_abs: tol.tolerance_abs }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, out, resolution_scale, tol } => {
            let scenario = Scenario::load(&config)?;
            let outcome = harness::run_scenario(&scenario, &out, &options(resolution_scale, &tol))?;
            for r in &outcome.rows {
                println!(
                    "{} r{} {}: lhs={:.6e} rhs={:.6e} margin={:.3e} {}",
                    r.scenario, r.resolution_scale, r.estimate, r.lhs, r.rhs, r.margin, r.verdict
                );
            }
            Ok(outcome.exit_code())
        }
        Command::Suite { config, out, jobs, resolution_scale, tol } => {
            let outcome = harness::run_suite(&config, &out, jobs, &options(resolution_scale, &tol))?;
            if outcome.scenarios == 0 {
                eprintln!("warning: no scenario files in {}", config.display());
                return Ok(0);
            }
            for (name, message) in &outcome.failures {
                eprintln!("{name}: error: {message}");
            }
            for (name, id) in &outcome.persistent_violations {
                eprintln!("{name}: {id} violated at every resolution");
            }
            println!(
                "{} scenarios, {} rows, {} failed; summary in {}",
                outcome.scenarios,
                outcome.rows.len(),
                outcome.failures.len(),
                out.join("summary.csv").display()
            );
            Ok(outcome.exit_code())
        }
        Command::Converge { config, out, resolution_scale, tol } => {
            let scenario = Scenario::load(&config)?;
            let report = harness::convergence_report(&scenario, &resolution_scale, &out, &options(None, &tol))?;
            for r in &report.rows {
                println!(
                    "r{} cells={} h={:.4e} {}: margin={:.3e} {}",
                    r.resolution_scale, r.cells, r.h, r.estimate, r.margin, r.verdict
                );
            }
            if let Some(order) = report.observed_order {
                println!("observed order {order:.3}");
            }
            Ok(0)
        }
        Command::Constants { max_dimension, plateau_radius } => {
            let rows = harness::constants_table(max_dimension, plateau_radius).context("computing constants")?;
            println!("{:>3} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14}", "N", "W_N", "omega_N", "C1", "M1", "M1/C1", "N*W_N");
            for r in rows {
                println!(
                    "{:>3} {:>14.10} {:>14.10} {:>14.8e} {:>14.8e} {:>14.10} {:>14.10}",
                    r[0] as usize, r[1], r[2], r[3], r[4], r[5], r[6]
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
