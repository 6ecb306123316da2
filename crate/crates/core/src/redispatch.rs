//! Pricing stage: fix the integer decisions of a solved expansion model,
//! re-solve the remaining LP and read nodal prices off the balance rows.

use std::collections::BTreeMap;

use gep_milp::{solve_lp, MilpModel, ModelError, SolveError, SolveOptions, Solution, Status};
use thiserror::Error;

use crate::expansion::{Role, RowKind, VariableRegistry};
use crate::system::{CandidatePayload, PowerSystem};
use crate::timegrid::TimeGrid;

#[derive(Debug, Error)]
pub enum RedispatchError {
    #[error("binary `{name}` has non-integral value {value}")]
    Fractional { name: String, value: f64 },
    #[error("solution has {got} values for a model with {expected} variables")]
    Length { expected: usize, got: usize },
    #[error("LP solution carries no duals")]
    MissingDuals,
    #[error("pricing LP ended with status {0:?}")]
    NotOptimal(Status),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Copy of `model` with every binary fixed to its rounded value in `values`
/// and turned continuous.
pub fn fix_binaries(model: &MilpModel, values: &[f64], integrality_tol: f64) -> Result<MilpModel, RedispatchError> {
    if values.len() != model.num_vars() {
        return Err(RedispatchError::Length {
            expected: model.num_vars(),
            got: values.len(),
        });
    }
    let mut lp = model.clone();
    let binaries: Vec<_> = model.binaries().collect();
    for v in binaries {
        let x = values[v.0];
        let r = x.round();
        if (x - r).abs() > integrality_tol || !(r == 0.0 || r == 1.0) {
            return Err(RedispatchError::Fractional {
                name: model.variable(v).name.clone(),
                value: x,
            });
        }
        lp.set_bounds(v, r, r)?;
        lp.relax(v);
    }
    Ok(lp)
}

/// Ids of hydro storages, existing and candidate.
fn hydro_storages(system: &PowerSystem) -> Vec<&str> {
    let mut ids: Vec<&str> = system
        .storage
        .iter()
        .filter(|u| u.kind.is_hydro())
        .map(|u| u.id.as_str())
        .chain(system.candidates.iter().filter_map(|c| match &c.payload {
            CandidatePayload::Storage(u) if u.kind.is_hydro() => Some(u.id.as_str()),
            _ => None,
        }))
        .collect();
    ids.sort_unstable();
    ids
}

/// Rewards every hourly hydro storage level by `epsilon`, which picks one of
/// the otherwise equal-cost reservoir trajectories.
pub fn add_water_incentive(model: &mut MilpModel, registry: &VariableRegistry, system: &PowerSystem, epsilon: f64) {
    if epsilon == 0.0 {
        return;
    }
    for id in hydro_storages(system) {
        for v in registry.series(id, Role::Level) {
            model.add_objective_term(v, -epsilon);
        }
    }
}

/// Largest objective change the incentive can cause: epsilon times the sum of
/// (scaled) reservoir capacities over all simulated hours.
pub fn incentive_bound(system: &PowerSystem, grid: &TimeGrid, epsilon: f64) -> f64 {
    let cap: f64 = system
        .storage
        .iter()
        .chain(system.candidates.iter().filter_map(|c| match &c.payload {
            CandidatePayload::Storage(u) => Some(u),
            _ => None,
        }))
        .filter(|u| u.kind.is_hydro())
        .map(|u| u.e_max * grid.storage_scaling(u.kind).bound)
        .sum();
    epsilon * cap * grid.simulated_hours as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceStats {
    pub simple_mean: f64,
    /// Weighted by nodal demand; equals the simple mean when demand is zero.
    pub load_weighted_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult {
    /// Bus id to hourly price per physical MWh.
    pub nodal_prices: BTreeMap<String, Vec<f64>>,
    pub dispatch: Vec<f64>,
    /// Pricing LP objective minus the expansion objective.
    pub objective_delta: f64,
    pub objective: f64,
}

/// Balance-row duals divided by the cost scale.
pub fn extract_prices(
    solution: &Solution,
    registry: &VariableRegistry,
    system: &PowerSystem,
    grid: &TimeGrid,
) -> Result<BTreeMap<String, Vec<f64>>, RedispatchError> {
    let duals = solution.duals.as_ref().ok_or(RedispatchError::MissingDuals)?;
    let mut out = BTreeMap::new();
    for b in &system.buses {
        let prices = (0..grid.simulated_hours)
            .map(|t| {
                let row = registry.row(&b.id, RowKind::Balance, t).expect("balance row exists");
                // +0.0 turns a negative zero into a positive one
                duals[row.0] / grid.cost_scale + 0.0
            })
            .collect();
        out.insert(b.id.clone(), prices);
    }
    Ok(out)
}

/// Fix, add the incentive, solve and extract prices.
pub fn price_dispatch(
    model: &MilpModel,
    registry: &VariableRegistry,
    system: &PowerSystem,
    grid: &TimeGrid,
    milp: &Solution,
    epsilon: f64,
    options: &SolveOptions,
) -> Result<PricingResult, RedispatchError> {
    let mut lp = fix_binaries(model, &milp.values, options.integrality_tol)?;
    add_water_incentive(&mut lp, registry, system, epsilon);
    let sol = solve_lp(&lp, options)?;
    if sol.status != Status::Optimal {
        return Err(RedispatchError::NotOptimal(sol.status));
    }
    let nodal_prices = extract_prices(&sol, registry, system, grid)?;
    Ok(PricingResult {
        nodal_prices,
        objective_delta: sol.objective - milp.objective,
        objective: sol.objective,
        dispatch: sol.values,
    })
}

/// Mean prices over all hours of the given buses.
pub fn price_stats<'a>(
    prices: &BTreeMap<String, Vec<f64>>,
    system: &PowerSystem,
    buses: impl IntoIterator<Item = &'a str>,
) -> Option<PriceStats> {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut weighted = 0.0;
    let mut load = 0.0;
    for id in buses {
        let (Some(p), Some(bus)) = (prices.get(id), system.bus(id)) else {
            continue;
        };
        for (t, &price) in p.iter().enumerate() {
            sum += price;
            n += 1;
            weighted += price * bus.demand[t];
            load += bus.demand[t];
        }
    }
    if n == 0 {
        return None;
    }
    let simple_mean = sum / n as f64;
    Some(PriceStats {
        simple_mean,
        load_weighted_mean: if load > 0.0 { weighted / load } else { simple_mean },
    })
}
