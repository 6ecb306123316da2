//! Translation of a [`PowerSystem`] into a [`MilpModel`].
//!
//! Thermal output is never a column of its own: wherever total output
//! appears it is written as `P^min u + p^min`. Reserve columns exist only for
//! units flagged eligible, so an ineligible unit contributes nothing to the
//! requirement rows.

mod investment;
mod network;
mod objective;
mod registry;
mod reserves;
mod res;
mod storage;
mod target;
mod thermal;

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use gep_milp::{Constraint, MilpModel, ModelError, RowId, Sense, VarId, Variable};
use thiserror::Error;

use crate::system::{CandidatePayload, PowerSystem, ScenarioConfig, ValidationReport};
use crate::timegrid::{TimeGrid, TimeGridError};

pub use investment::{add_investment_linking, add_investment_variables};
pub use network::add_network;
pub use objective::build_objective;
pub use registry::{Role, RowKind, VariableRegistry, SYSTEM_KEY};
pub use reserves::add_reserve_requirements;
pub use res::add_res;
pub use storage::add_storage;
pub use target::{add_res_target, counts_toward_target};
pub use thermal::add_thermal_uc;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid system data:\n{0}")]
    Invalid(ValidationReport),
    #[error("system covers {system} hours but the time grid simulates {grid}")]
    HorizonMismatch { system: usize, grid: usize },
    #[error("buses {buses:?} form a network component without the slack bus `{slack}`")]
    Disconnected { slack: String, buses: Vec<String> },
    #[error("no slack bus: the system has no buses")]
    NoSlack,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    TimeGrid(#[from] TimeGridError),
}

/// A model under construction together with its registry.
#[derive(Debug, Clone, Default)]
pub struct Assembly {
    pub model: MilpModel,
    pub registry: VariableRegistry,
}

impl Assembly {
    /// Adds a continuous hourly (or scalar, when `hour` is `None`) column.
    pub(crate) fn continuous(
        &mut self,
        owner: &str,
        role: Role,
        hour: Option<usize>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, BuildError> {
        self.column(owner, role, hour, Variable::continuous(var_name(owner, role, hour), lower, upper))
    }

    pub(crate) fn binary(&mut self, owner: &str, role: Role, hour: Option<usize>) -> Result<VarId, BuildError> {
        self.column(owner, role, hour, Variable::binary(var_name(owner, role, hour)))
    }

    fn column(&mut self, owner: &str, role: Role, hour: Option<usize>, v: Variable) -> Result<VarId, BuildError> {
        let id = self.model.add_variable(v)?;
        self.registry.record_var(owner, role, hour, id);
        Ok(id)
    }

    pub(crate) fn row(
        &mut self,
        owner: &str,
        kind: RowKind,
        hour: Option<usize>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<RowId, BuildError> {
        let name = match hour {
            Some(t) => format!("{}_{owner}_{t}", kind.prefix()),
            None => format!("{}_{owner}", kind.prefix()),
        };
        let id = self
            .model
            .add_constraint(Constraint::new(name, merge_terms(terms), sense, rhs))?;
        self.registry.record_row(owner, kind, hour, id);
        Ok(id)
    }
}

fn var_name(owner: &str, role: Role, hour: Option<usize>) -> String {
    match hour {
        Some(t) => format!("{}_{owner}_{t}", role.prefix()),
        None => format!("{}_{owner}", role.prefix()),
    }
}

/// Sums repeated columns and drops zero coefficients, keeping first-seen order.
fn merge_terms(terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    let mut index: HashMap<VarId, usize> = HashMap::new();
    for (v, a) in terms {
        match index.entry(v) {
            Entry::Occupied(e) => out[*e.get()].1 += a,
            Entry::Vacant(e) => {
                e.insert(out.len());
                out.push((v, a));
            }
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}

/// Restricts every hourly series of `system` to the simulated hours of `grid`.
pub fn compress_system(system: &PowerSystem, grid: &TimeGrid) -> Result<PowerSystem, TimeGridError> {
    system.map_series(grid.simulated_hours, |s| grid.compress_series(s))
}

/// Builds the full model. `system` must already live on the simulated
/// horizon of `grid` (see [`compress_system`]).
pub fn assemble(system: &PowerSystem, config: &ScenarioConfig, grid: &TimeGrid) -> Result<Assembly, BuildError> {
    if system.hours != grid.simulated_hours {
        return Err(BuildError::HorizonMismatch {
            system: system.hours,
            grid: grid.simulated_hours,
        });
    }
    let report = crate::system::validate_system(system, config);
    if !report.is_empty() {
        return Err(BuildError::Invalid(report));
    }

    let mut asm = Assembly::default();
    add_investment_variables(&mut asm, &system.candidates)?;

    let mut thermal: Vec<_> = system.thermal.iter().collect();
    let mut storage: Vec<_> = system.storage.iter().map(|u| (u, None)).collect();
    let mut res: Vec<_> = system.res.iter().collect();
    for c in &system.candidates {
        match &c.payload {
            CandidatePayload::Thermal(u) => thermal.push(u),
            CandidatePayload::Storage(u) => storage.push((u, asm.registry.invest(&u.id))),
            CandidatePayload::Res(u) => res.push(u),
        }
    }
    thermal.sort_by(|a, b| a.id.cmp(&b.id));
    storage.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    res.sort_by(|a, b| a.id.cmp(&b.id));

    for u in thermal {
        add_thermal_uc(&mut asm, u, grid)?;
    }
    for (u, inv) in storage {
        add_storage(&mut asm, u, grid, inv)?;
    }
    for u in res {
        let candidate = system.candidates.iter().any(|c| c.id() == u.id);
        add_res(&mut asm, u, grid, candidate)?;
    }
    add_investment_linking(&mut asm, &system.candidates, grid)?;
    add_reserve_requirements(&mut asm, system, grid)?;
    add_network(&mut asm, system, config, grid)?;
    if config.res_target_energy.is_some() {
        add_res_target(&mut asm, system, config, grid)?;
    }
    for (v, c) in build_objective(system, config, grid, &asm.registry) {
        asm.model.add_objective_term(v, c);
    }
    Ok(asm)
}
