//! `gep`: solve one expansion-planning scenario and write its result tables.
//!
//! Exit codes: 0 optimal, 1 I/O failure, 2 usage, 3 invalid data,
//! 4 infeasible, 5 solver limit, 6 unbounded or numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use gep_core::io::{save_results, ScenarioError};
use gep_core::pipeline::{run_scenario, PipelineError, RunOptions};
use gep_core::redispatch::RedispatchError;
use gep_core::timegrid::Compression;
use gep_milp::{SolveError, SolveOptions, Status};

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_LIMIT: u8 = 5;
const EXIT_NUMERICAL: u8 = 6;

#[derive(Debug, Parser)]
#[command(name = "gep", version, about = "Generation expansion planning with nodal re-dispatch pricing")]
struct Args {
    /// Scenario directory containing scenario.toml.
    #[arg(long)]
    scenario: PathBuf,
    /// Time compression, overriding the manifest.
    #[arg(long, value_parser = parse_compression)]
    compression: Option<Compression>,
    /// Annual renewable energy target in TWh, overriding the manifest.
    #[arg(long, value_name = "TWh")]
    res_target: Option<f64>,
    /// Write the expansion model as MPS before solving.
    #[arg(long, value_name = "PATH")]
    emit_mps: Option<PathBuf>,
    /// Relative optimality gap for branch-and-bound.
    #[arg(long)]
    mip_gap: Option<f64>,
    /// Solver time limit in seconds.
    #[arg(long, value_name = "SECONDS")]
    time_limit: Option<f64>,
    /// Results directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Log pipeline progress to standard error.
    #[arg(short, long)]
    verbose: bool,
}

fn parse_compression(s: &str) -> Result<Compression, String> {
    s.parse()
}

fn exit_code(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Scenario(ScenarioError::Io { .. } | ScenarioError::Missing(_)) | PipelineError::Mps { .. } => {
            EXIT_IO
        }
        PipelineError::Scenario(_) | PipelineError::Build(_) | PipelineError::TimeGrid(_) => EXIT_DATA,
        PipelineError::Solve(SolveError::InvalidOptions(_)) => EXIT_USAGE,
        PipelineError::Solve(SolveError::Io(_)) => EXIT_IO,
        PipelineError::Solve(_) => EXIT_NUMERICAL,
        PipelineError::Infeasible => EXIT_INFEASIBLE,
        PipelineError::LimitNoSolution => EXIT_LIMIT,
        PipelineError::Unbounded | PipelineError::Numerical => EXIT_NUMERICAL,
        PipelineError::Redispatch(RedispatchError::Solve(SolveError::Io(_))) => EXIT_IO,
        PipelineError::Redispatch(_) => EXIT_NUMERICAL,
    }
}

fn options(args: &Args) -> Result<RunOptions, String> {
    let mut solve = SolveOptions::default();
    if let Some(g) = args.mip_gap {
        solve.mip_gap = g;
    }
    if let Some(t) = args.time_limit {
        if !(t.is_finite() && t >= 0.0) {
            return Err(format!("--time-limit must be a nonnegative number of seconds, got {t}"));
        }
        solve.time_limit = Some(Duration::from_secs_f64(t));
    }
    let res_target_mwh = match args.res_target {
        Some(t) if !(t.is_finite() && t >= 0.0) => {
            return Err(format!("--res-target must be a nonnegative number of TWh, got {t}"))
        }
        Some(t) => Some(t * 1e6),
        None => None,
    };
    Ok(RunOptions {
        compression: args.compression,
        res_target_mwh,
        emit_mps: args.emit_mps.clone(),
        solve,
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new()
        .filter_level(if args.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();

    let opts = match options(&args) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match run_scenario(&args.scenario, &opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let s = &outcome.report.summary;
    println!("scenario: {}", s.scenario);
    println!("status: {}", s.status);
    println!("objective: {}", s.objective);
    println!("investment cost: {}", s.investment_cost);
    if let Some(p) = &s.prices {
        println!("mean price: {} (load-weighted {})", p.simple_mean, p.load_weighted_mean);
    }
    if let Some(out) = &args.out {
        if let Err(e) = save_results(&outcome.report, out) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    if outcome.milp.status == Status::LimitFeasible {
        eprintln!("warning: solver limit reached, plan is not proven optimal");
        return ExitCode::from(EXIT_LIMIT);
    }
    ExitCode::SUCCESS
}
