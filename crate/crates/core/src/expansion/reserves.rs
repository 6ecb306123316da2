//! System reserve requirements.
//!
//! Tertiary requirements grow with the built wind and PV capacity; secondary
//! requirements are plain input series. Providers are the units that own the
//! matching reserve column (thermal units and storages flagged eligible).

use gep_milp::{Sense, VarId};

use super::{Assembly, BuildError, Role, RowKind, SYSTEM_KEY};
use crate::system::{CandidatePayload, PowerSystem, ResTechnology};
use crate::timegrid::TimeGrid;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ReserveColumns {
    pub scr_up: Option<VarId>,
    pub scr_down: Option<VarId>,
    pub tcr_up: Option<VarId>,
    pub tcr_down: Option<VarId>,
}

impl ReserveColumns {
    pub fn up(&self) -> impl Iterator<Item = VarId> {
        self.scr_up.into_iter().chain(self.tcr_up)
    }

    pub fn down(&self) -> impl Iterator<Item = VarId> {
        self.scr_down.into_iter().chain(self.tcr_down)
    }

    pub fn any_up(&self) -> bool {
        self.scr_up.is_some() || self.tcr_up.is_some()
    }

    pub fn any_down(&self) -> bool {
        self.scr_down.is_some() || self.tcr_down.is_some()
    }
}

pub(crate) fn reserve_columns(
    asm: &mut Assembly,
    owner: &str,
    t: usize,
    scr: bool,
    tcr: bool,
) -> Result<ReserveColumns, BuildError> {
    let mut r = ReserveColumns::default();
    if scr {
        r.scr_up = Some(asm.continuous(owner, Role::ScrUp, Some(t), 0.0, f64::INFINITY)?);
        r.scr_down = Some(asm.continuous(owner, Role::ScrDown, Some(t), 0.0, f64::INFINITY)?);
    }
    if tcr {
        r.tcr_up = Some(asm.continuous(owner, Role::TcrUp, Some(t), 0.0, f64::INFINITY)?);
        r.tcr_down = Some(asm.continuous(owner, Role::TcrDown, Some(t), 0.0, f64::INFINITY)?);
    }
    Ok(r)
}

/// Ids of every thermal and storage unit, existing and candidate, sorted.
fn provider_ids(system: &PowerSystem) -> Vec<&str> {
    let mut ids: Vec<&str> = system
        .thermal
        .iter()
        .map(|u| u.id.as_str())
        .chain(system.storage.iter().map(|u| u.id.as_str()))
        .chain(system.candidates.iter().filter_map(|c| match &c.payload {
            CandidatePayload::Thermal(u) => Some(u.id.as_str()),
            CandidatePayload::Storage(u) => Some(u.id.as_str()),
            CandidatePayload::Res(_) => None,
        }))
        .collect();
    ids.sort_unstable();
    ids
}

pub fn add_reserve_requirements(asm: &mut Assembly, system: &PowerSystem, grid: &TimeGrid) -> Result<(), BuildError> {
    let policy = &system.reserves;
    let providers = provider_ids(system);
    let mut wind = Vec::new();
    let mut pv = Vec::new();
    for c in &system.candidates {
        if let CandidatePayload::Res(u) = &c.payload {
            let inv = asm.registry.invest(&u.id).expect("investment columns are created first");
            match u.technology {
                ResTechnology::Wind => wind.push(inv),
                ResTechnology::Pv => pv.push(inv),
                _ => {}
            }
        }
    }

    let families = [
        (RowKind::TcrUpRequirement, Role::TcrUp, &policy.tcr_up, policy.a_wind_up, policy.a_pv_up),
        (RowKind::TcrDownRequirement, Role::TcrDown, &policy.tcr_down, policy.a_wind_down, policy.a_pv_down),
        (RowKind::ScrUpRequirement, Role::ScrUp, &policy.scr_up, 0.0, 0.0),
        (RowKind::ScrDownRequirement, Role::ScrDown, &policy.scr_down, 0.0, 0.0),
    ];
    for t in 0..grid.simulated_hours {
        for &(kind, role, series, a_wind, a_pv) in &families {
            let mut terms: Vec<(VarId, f64)> = providers
                .iter()
                .filter_map(|id| asm.registry.var(id, role, t))
                .map(|v| (v, 1.0))
                .collect();
            terms.extend(wind.iter().map(|&v| (v, -a_wind)));
            terms.extend(pv.iter().map(|&v| (v, -a_pv)));
            asm.row(SYSTEM_KEY, kind, Some(t), terms, Sense::Ge, series[t])?;
        }
    }
    Ok(())
}
