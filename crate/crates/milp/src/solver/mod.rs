//! LP and MILP solving over [`MilpModel`].
//!
//! [`solve_lp`] runs the bounded-variable simplex with binaries relaxed,
//! [`solve_milp`] wraps it in a deterministic best-bound branch-and-bound, and
//! [`enumerate_oracle`] solves every binary assignment for verification.

mod bnb;
mod certificate;
mod lu;
mod oracle;
mod simplex;

use std::io::BufRead;
use std::time::Duration;

use thiserror::Error;

use crate::model::MilpModel;
pub use certificate::{lp_certificate, LpCertificate};
pub use oracle::{enumerate_oracle, MAX_ORACLE_BINARIES};
use simplex::{LpData, LpStatus, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub integrality_tol: f64,
    /// Relative gap at which branch-and-bound stops.
    pub mip_gap: f64,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-7,
            integrality_tol: 1e-6,
            mip_gap: 1e-6,
            node_limit: None,
            time_limit: None,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        let tols = [
            ("feasibility_tol", self.feasibility_tol),
            ("optimality_tol", self.optimality_tol),
            ("integrality_tol", self.integrality_tol),
            ("mip_gap", self.mip_gap),
        ];
        for (name, v) in tols {
            if !(v.is_finite() && v > 0.0) {
                return Err(SolveError::InvalidOptions(format!("{name} must be positive, got {v}")));
            }
        }
        if self.integrality_tol >= 0.5 {
            return Err(SolveError::InvalidOptions("integrality_tol must be below 0.5".into()));
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            primal: self.feasibility_tol,
            dual: self.optimality_tol,
            stall_threshold: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// A node or time limit stopped the search with an incumbent available.
    LimitFeasible,
    /// A limit stopped the search before any feasible point was found.
    LimitNoSolution,
    /// The simplex could not reach a trustworthy answer.
    NumericalFailure,
}

impl Status {
    /// True when `values` hold a feasible point.
    pub fn has_solution(self) -> bool {
        matches!(self, Status::Optimal | Status::LimitFeasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub values: Vec<f64>,
    /// Objective including the model's constant offset.
    pub objective: f64,
    /// Row duals, only for optimal pure-LP solves. Dual of a `>=` row is
    /// nonnegative, of a `<=` row nonpositive.
    pub duals: Option<Vec<f64>>,
    /// Best proven lower bound (equals `objective` for optimal LPs).
    pub bound: f64,
    pub nodes: usize,
    pub iterations: usize,
}

impl Solution {
    fn without_point(status: Status, n: usize) -> Self {
        let objective = match status {
            Status::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        };
        Self {
            status,
            values: vec![0.0; n],
            objective,
            duals: None,
            bound: objective,
            nodes: 0,
            iterations: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("model has {got} binaries, the enumeration oracle accepts at most {max}")]
    TooManyBinaries { got: usize, max: usize },
    #[error("solution file line {line}: {message}")]
    SolutionFile { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn objective_value(model: &MilpModel, x: &[f64]) -> f64 {
    model
        .objective()
        .iter()
        .zip(x)
        .map(|(c, v)| c * v)
        .sum::<f64>()
        + model.objective_offset()
}

/// Clamps tiny bound violations left by the simplex tolerances.
pub(crate) fn clamp_to_bounds(model: &MilpModel, x: &mut [f64]) {
    for (v, var) in x.iter_mut().zip(model.variables()) {
        *v = v.clamp(var.lower, var.upper);
    }
}

fn map_lp_status(s: LpStatus) -> Status {
    match s {
        LpStatus::Optimal => Status::Optimal,
        LpStatus::Infeasible => Status::Infeasible,
        LpStatus::Unbounded => Status::Unbounded,
        LpStatus::IterationLimit | LpStatus::NumericalFailure => Status::NumericalFailure,
    }
}

/// Solves the LP relaxation (binaries treated as continuous in their bounds).
pub fn solve_lp(model: &MilpModel, options: &SolveOptions) -> Result<Solution, SolveError> {
    options.validate()?;
    let data = LpData::new(model);
    Ok(lp_with_data(model, &data, &[], options))
}

fn lp_with_data(
    model: &MilpModel,
    data: &LpData,
    overrides: &[(usize, f64, f64)],
    options: &SolveOptions,
) -> Solution {
    let out = data.solve(overrides, &options.tolerances());
    let status = map_lp_status(out.status);
    if status != Status::Optimal {
        let mut s = Solution::without_point(status, model.num_vars());
        s.iterations = out.iterations;
        return s;
    }
    let mut values = out.x;
    for &(j, lo, up) in overrides {
        values[j] = values[j].clamp(lo, up);
    }
    clamp_to_bounds(model, &mut values);
    let objective = objective_value(model, &values);
    Solution {
        status,
        values,
        objective,
        duals: Some(out.duals),
        bound: objective,
        nodes: 0,
        iterations: out.iterations,
    }
}

/// Branch-and-bound over the binaries of `model`.
pub fn solve_milp(model: &MilpModel, options: &SolveOptions) -> Result<Solution, SolveError> {
    options.validate()?;
    if model.num_binaries() == 0 {
        let mut s = solve_lp(model, options)?;
        s.duals = None;
        return Ok(s);
    }
    Ok(bnb::branch_and_bound(model, options))
}

/// Reads a `name value` per line solution file (as written by external
/// solvers) into a value vector ordered like `model`'s variables. Blank lines
/// and lines starting with `#` are skipped; unknown names are errors and
/// variables not mentioned default to zero.
pub fn read_solution_file<R: BufRead>(model: &MilpModel, input: R) -> Result<Vec<f64>, SolveError> {
    let mut values = vec![0.0; model.num_vars()];
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| SolveError::SolutionFile { line: idx + 1, message };
        let mut parts = trimmed.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(format!("expected `name value`, got `{trimmed}`")));
        };
        let var = model
            .var_by_name(name)
            .ok_or_else(|| err(format!("unknown variable `{name}`")))?;
        values[var.0] = value
            .parse::<f64>()
            .map_err(|e| err(format!("bad value `{value}`: {e}")))?;
    }
    Ok(values)
}
