//! Total cost: operating terms scaled by the time grid, investment unscaled.

use gep_milp::VarId;

use super::{Role, VariableRegistry};
use crate::system::{CandidatePayload, PowerSystem, ResUnit, ScenarioConfig, StorageCostSide, StorageUnit, ThermalUnit};
use crate::timegrid::TimeGrid;

pub fn build_objective(
    system: &PowerSystem,
    config: &ScenarioConfig,
    grid: &TimeGrid,
    registry: &VariableRegistry,
) -> Vec<(VarId, f64)> {
    let k = grid.cost_scale;
    let mut out = Vec::new();
    let mut thermal: Vec<&ThermalUnit> = system.thermal.iter().collect();
    let mut storage: Vec<&StorageUnit> = system.storage.iter().collect();
    let mut res: Vec<&ResUnit> = system.res.iter().collect();
    for c in &system.candidates {
        match &c.payload {
            CandidatePayload::Thermal(u) => thermal.push(u),
            CandidatePayload::Storage(u) => storage.push(u),
            CandidatePayload::Res(u) => res.push(u),
        }
    }

    let mut push = |owner: &str, role: Role, coeff: f64| {
        if coeff != 0.0 {
            out.extend(registry.series(owner, role).into_iter().map(|v| (v, coeff)));
        }
    };
    for u in thermal {
        // output is P^min u + p^min
        push(&u.id, Role::On, k * u.cost_prod * u.p_min);
        push(&u.id, Role::AboveMin, k * u.cost_prod);
        push(&u.id, Role::Start, k * u.cost_startup);
    }
    for u in storage {
        let role = match config.storage_cost_side {
            StorageCostSide::Charge => Role::Charge,
            StorageCostSide::Discharge => Role::Discharge,
        };
        push(&u.id, role, k * u.cost_charge);
    }
    for u in res {
        push(&u.id, Role::ResProd, k * u.cost_prod);
    }
    for b in &system.buses {
        push(&b.id, Role::LoadShed, k * config.load_shed_cost);
    }
    for c in &system.candidates {
        if let Some(v) = registry.invest(c.id()) {
            if c.invest_cost != 0.0 {
                out.push((v, c.invest_cost));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::assemble;
    use crate::system::fixtures::{storage, system, thermal};
    use crate::system::{CandidateUnit, StorageKind};
    use crate::timegrid::Compression;

    fn compressed_grid(hours: usize) -> TimeGrid {
        TimeGrid {
            compression: Compression::EveryOtherDay,
            cost_scale: 2.0,
            storage_scale: 2.0,
            ..TimeGrid::identity(hours)
        }
    }

    fn coeff(asm: &crate::expansion::Assembly, name: &str) -> f64 {
        asm.model.objective_coefficient(asm.model.var_by_name(name).unwrap())
    }

    #[test]
    fn compressed_operating_costs_are_doubled() {
        let mut s = system(1, &["N1"]);
        s.thermal.push(thermal("G1", "N1", 1));
        s.storage.push(storage("P1", "N1", StorageKind::PumpDaily, 1));
        let mut cand = thermal("GC", "N1", 1);
        cand.cost_prod = 60.0;
        s.candidates.push(CandidateUnit {
            payload: CandidatePayload::Thermal(cand),
            invest_cost: 1e6,
            invest_cap_max: 0.0,
            counts_toward_res_target: false,
        });
        let asm = assemble(&s, &ScenarioConfig::default(), &compressed_grid(1)).unwrap();
        assert_eq!(coeff(&asm, "pmin_G1_0"), 100.0);
        assert_eq!(coeff(&asm, "u_G1_0"), 100.0 * 100.0);
        assert_eq!(coeff(&asm, "v_G1_0"), 2000.0);
        assert_eq!(coeff(&asm, "inv_GC"), 1e6);
        assert_eq!(coeff(&asm, "ls_N1_0"), 6000.0);
        assert_eq!(coeff(&asm, "ch_P1_0"), 2.0);
        assert_eq!(coeff(&asm, "dis_P1_0"), 0.0);
    }

    #[test]
    fn storage_cost_side_switch() {
        let mut s = system(1, &["N1"]);
        s.storage.push(storage("P1", "N1", StorageKind::PumpDaily, 1));
        let config = ScenarioConfig {
            storage_cost_side: StorageCostSide::Discharge,
            ..ScenarioConfig::default()
        };
        let asm = assemble(&s, &config, &TimeGrid::identity(1)).unwrap();
        assert_eq!(coeff(&asm, "dis_P1_0"), 1.0);
        assert_eq!(coeff(&asm, "ch_P1_0"), 0.0);
    }
}
