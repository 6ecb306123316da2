//! Annual energy target for non-hydro renewables.

use gep_milp::{Sense, VarId};

use super::{Assembly, BuildError, Role, RowKind, SYSTEM_KEY};
use crate::system::{CandidatePayload, Fuel, PowerSystem, ResTechnology, ScenarioConfig};
use crate::timegrid::TimeGrid;

/// Units whose production counts toward the target: existing PV, wind and
/// biomass (renewable or thermal fuel) plus flagged candidates. Sorted by id.
pub fn counts_toward_target(system: &PowerSystem) -> Vec<&str> {
    let mut ids: Vec<&str> = Vec::new();
    ids.extend(
        system
            .res
            .iter()
            .filter(|u| matches!(u.technology, ResTechnology::Pv | ResTechnology::Wind | ResTechnology::Biomass))
            .map(|u| u.id.as_str()),
    );
    ids.extend(system.thermal.iter().filter(|u| u.fuel == Fuel::Biomass).map(|u| u.id.as_str()));
    ids.extend(system.candidates.iter().filter(|c| c.counts_toward_res_target).map(|c| c.id()));
    ids.sort_unstable();
    ids
}

fn thermal_p_min(system: &PowerSystem, id: &str) -> Option<f64> {
    system.thermal.iter().find(|u| u.id == id).map(|u| u.p_min).or_else(|| {
        system.candidates.iter().find_map(|c| match &c.payload {
            CandidatePayload::Thermal(u) if u.id == id => Some(u.p_min),
            _ => None,
        })
    })
}

/// `cost_scale * sum of hourly production >= target`, so the left side is
/// annual energy even on a compressed horizon.
pub fn add_res_target(
    asm: &mut Assembly,
    system: &PowerSystem,
    config: &ScenarioConfig,
    grid: &TimeGrid,
) -> Result<(), BuildError> {
    let Some(target) = config.res_target_energy else {
        return Ok(());
    };
    let k = grid.cost_scale;
    let mut terms: Vec<(VarId, f64)> = Vec::new();
    for id in counts_toward_target(system) {
        let reg = &asm.registry;
        if let Some(p_min) = thermal_p_min(system, id) {
            terms.extend(reg.series(id, Role::On).into_iter().map(|v| (v, k * p_min)));
            terms.extend(reg.series(id, Role::AboveMin).into_iter().map(|v| (v, k)));
        } else if reg.has_role(id, Role::ResProd) {
            terms.extend(reg.series(id, Role::ResProd).into_iter().map(|v| (v, k)));
        } else {
            terms.extend(reg.series(id, Role::Discharge).into_iter().map(|v| (v, k)));
        }
    }
    asm.row(SYSTEM_KEY, RowKind::ResTarget, None, terms, Sense::Ge, target)?;
    Ok(())
}
