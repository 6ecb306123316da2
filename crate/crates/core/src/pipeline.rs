//! One scenario run: load, compress, assemble, solve, price, report.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gep_milp::{solve_milp, write_mps, SolveError, SolveOptions, Solution, Status};
use log::info;
use thiserror::Error;

use crate::expansion::{assemble, compress_system, BuildError};
use crate::io::{load_scenario, ScenarioError};
use crate::redispatch::{price_dispatch, RedispatchError};
use crate::report::{build_report, ScenarioReport};
use crate::system::validate_system;
use crate::timegrid::{build_time_grid, Compression, TimeGridError};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the manifest compression.
    pub compression: Option<Compression>,
    /// Overrides the manifest renewable target, MWh per year.
    pub res_target_mwh: Option<f64>,
    /// Writes the expansion model here before solving.
    pub emit_mps: Option<PathBuf>,
    pub solve: SolveOptions,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    TimeGrid(#[from] TimeGridError),
    #[error("{}: {source}", path.display())]
    Mps { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("expansion model is infeasible")]
    Infeasible,
    #[error("expansion model is unbounded")]
    Unbounded,
    #[error("solver limit reached before a feasible plan was found")]
    LimitNoSolution,
    #[error("solver failed numerically")]
    Numerical,
    #[error("pricing stage: {0}")]
    Redispatch(#[from] RedispatchError),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ScenarioReport,
    pub milp: Solution,
}

fn emit_mps(model: &gep_milp::MilpModel, name: &str, path: &Path) -> Result<(), PipelineError> {
    let err = |source| PipelineError::Mps {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(fs::File::create(path).map_err(err)?);
    write_mps(model, name, &mut w).map_err(err)?;
    w.flush().map_err(err)
}

/// Runs the scenario in `dir`. A plan found under a solver limit is still
/// reported; check `milp.status`.
pub fn run_scenario(dir: &Path, options: &RunOptions) -> Result<RunOutcome, PipelineError> {
    let (system, mut config) = load_scenario(dir)?;
    if let Some(c) = options.compression {
        config.compression = c;
    }
    if let Some(t) = options.res_target_mwh {
        config.res_target_energy = Some(t);
        let report = validate_system(&system, &config);
        if !report.is_empty() {
            return Err(ScenarioError::Invalid(report).into());
        }
    }
    let grid = build_time_grid(config.compression);
    let system = compress_system(&system, &grid)?;
    let asm = assemble(&system, &config, &grid)?;
    info!(
        "assembled {}: {} variables ({} binary), {} rows over {} hours",
        config.name,
        asm.model.num_vars(),
        asm.model.num_binaries(),
        asm.model.num_constraints(),
        grid.simulated_hours
    );
    if let Some(path) = &options.emit_mps {
        emit_mps(&asm.model, &config.name, path)?;
        info!("wrote {}", path.display());
    }

    let milp = solve_milp(&asm.model, &options.solve)?;
    info!(
        "expansion solve: {:?}, objective {}, {} nodes",
        milp.status, milp.objective, milp.nodes
    );
    match milp.status {
        Status::Optimal | Status::LimitFeasible => {}
        Status::Infeasible => return Err(PipelineError::Infeasible),
        Status::Unbounded => return Err(PipelineError::Unbounded),
        Status::LimitNoSolution => return Err(PipelineError::LimitNoSolution),
        Status::NumericalFailure => return Err(PipelineError::Numerical),
    }

    let pricing = price_dispatch(
        &asm.model,
        &asm.registry,
        &system,
        &grid,
        &milp,
        config.water_incentive,
        &options.solve,
    )?;
    info!("pricing solve: objective {}", pricing.objective);
    let report = build_report(&system, &config, &grid, &asm.registry, &asm.model, &milp, &pricing);
    Ok(RunOutcome { report, milp })
}
