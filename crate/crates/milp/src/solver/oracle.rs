//! Exhaustive enumeration of binary assignments, used as a test oracle.

use super::simplex::LpData;
use super::{lp_with_data, SolveError, SolveOptions, Solution, Status};
use crate::model::MilpModel;

pub const MAX_ORACLE_BINARIES: usize = 20;

/// Solves one LP per binary assignment and keeps the best. Assignment `k`
/// sets binary `i` (in id order) to bit `i` of `k`; among equal objectives the
/// first assignment wins.
pub fn enumerate_oracle(model: &MilpModel, options: &SolveOptions) -> Result<Solution, SolveError> {
    options.validate()?;
    let binaries: Vec<usize> = model.binaries().map(|v| v.0).collect();
    if binaries.len() > MAX_ORACLE_BINARIES {
        return Err(SolveError::TooManyBinaries {
            got: binaries.len(),
            max: MAX_ORACLE_BINARIES,
        });
    }
    let data = LpData::new(model);
    let mut best: Option<Solution> = None;
    let mut unbounded = false;
    let mut trouble = false;
    let mut iterations = 0;
    let count = 1usize << binaries.len();

    for k in 0..count {
        let mut fixings = Vec::with_capacity(binaries.len());
        let mut skip = false;
        for (bit, &j) in binaries.iter().enumerate() {
            let v = ((k >> bit) & 1) as f64;
            let var = &model.variables()[j];
            if v < var.lower || v > var.upper {
                skip = true;
                break;
            }
            fixings.push((j, v, v));
        }
        if skip {
            continue;
        }
        let s = lp_with_data(model, &data, &fixings, options);
        iterations += s.iterations;
        match s.status {
            Status::Optimal => {
                if best.as_ref().is_none_or(|b| s.objective < b.objective) {
                    best = Some(s);
                }
            }
            Status::Unbounded => unbounded = true,
            Status::Infeasible => {}
            _ => trouble = true,
        }
    }

    let n = model.num_vars();
    let mut result = if unbounded {
        Solution::without_point(Status::Unbounded, n)
    } else if trouble {
        best.map(|mut b| {
            b.status = Status::NumericalFailure;
            b
        })
        .unwrap_or_else(|| Solution::without_point(Status::NumericalFailure, n))
    } else {
        best.unwrap_or_else(|| Solution::without_point(Status::Infeasible, n))
    };
    if !binaries.is_empty() {
        result.duals = None;
    }
    result.nodes = count;
    result.iterations = iterations;
    result.bound = result.objective;
    Ok(result)
}
