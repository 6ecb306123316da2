//! Storage dispatch, energy levels and reserve capability.
//!
//! For a candidate storage every capacity constant (power ratings, level
//! limits, initial level, inflow) is multiplied by its build decision, so an
//! unbuilt storage has no dispatch, no level and no reserve capability.

use gep_milp::{Sense, VarId};

use super::reserves::reserve_columns;
use super::{Assembly, BuildError, Role, RowKind};
use crate::system::{StorageKind, StorageUnit};
use crate::timegrid::TimeGrid;

pub fn add_storage(
    asm: &mut Assembly,
    unit: &StorageUnit,
    grid: &TimeGrid,
    invest: Option<VarId>,
) -> Result<(), BuildError> {
    let hours = grid.simulated_hours;
    let id = unit.id.as_str();
    let sc = grid.storage_scaling(unit.kind);
    let dam = unit.kind == StorageKind::Dam;
    let e_lo = (unit.e_min * sc.bound).max(0.0);
    let e_hi = unit.e_max * sc.bound;
    let e0 = unit.e_initial * sc.bound;
    let p_ch = if dam { 0.0 } else { unit.p_max_ch };

    let mut dis = Vec::with_capacity(hours);
    let mut ch = Vec::with_capacity(hours);
    let mut e = Vec::with_capacity(hours);
    let mut r = Vec::with_capacity(hours);
    for t in 0..hours {
        dis.push(asm.continuous(id, Role::Discharge, Some(t), 0.0, unit.p_max_dis)?);
        ch.push(asm.continuous(id, Role::Charge, Some(t), 0.0, p_ch)?);
        let (lo, hi) = if invest.is_some() { (0.0, e_hi) } else { (e_lo, e_hi) };
        e.push(asm.continuous(id, Role::Level, Some(t), lo, hi)?);
        r.push(reserve_columns(asm, id, t, unit.scr_eligible, unit.tcr_eligible)?);
    }

    // capacity constant `c`: a right-hand side for existing units, a
    // coefficient on the build decision for candidates
    let cap = |terms: &mut Vec<(VarId, f64)>, c: f64| -> f64 {
        match invest {
            Some(inv) => {
                terms.push((inv, -c));
                0.0
            }
            None => c,
        }
    };

    for t in 0..hours {
        let mut soc = vec![
            (e[t], 1.0),
            (ch[t], -sc.charge * unit.eta_ch),
            (dis[t], sc.discharge / unit.eta_dis),
        ];
        let mut rhs = cap(&mut soc, sc.inflow * unit.inflow[t]);
        if t == 0 {
            rhs += cap(&mut soc, e0);
        } else {
            soc.push((e[t - 1], -1.0));
        }
        asm.row(id, RowKind::StorageBalance, Some(t), soc, Sense::Eq, rhs)?;

        if let Some(inv) = invest {
            asm.row(id, RowKind::InvestDischarge, Some(t), vec![(dis[t], 1.0), (inv, -unit.p_max_dis)], Sense::Le, 0.0)?;
            if !dam {
                asm.row(id, RowKind::InvestCharge, Some(t), vec![(ch[t], 1.0), (inv, -p_ch)], Sense::Le, 0.0)?;
            }
            asm.row(id, RowKind::InvestLevelMax, Some(t), vec![(e[t], 1.0), (inv, -e_hi)], Sense::Le, 0.0)?;
            if e_lo > 0.0 {
                asm.row(id, RowKind::InvestLevelMin, Some(t), vec![(e[t], 1.0), (inv, -e_lo)], Sense::Ge, 0.0)?;
            }
        }

        if r[t].any_up() {
            let mut up: Vec<(VarId, f64)> = r[t].up().map(|c| (c, 1.0)).collect();
            up.extend([(dis[t], 1.0), (ch[t], -1.0)]);
            let rhs = cap(&mut up, unit.p_max_dis);
            asm.row(id, RowKind::StorageUpReserve, Some(t), up, Sense::Le, rhs)?;
        }
        if r[t].any_down() {
            if dam {
                let mut floor: Vec<(VarId, f64)> = vec![(dis[t], 1.0)];
                floor.extend(r[t].down().map(|c| (c, -1.0)));
                let mut ceiling = floor.clone();
                asm.row(id, RowKind::DamDownFloor, Some(t), floor, Sense::Ge, 0.0)?;
                let rhs = cap(&mut ceiling, unit.p_max_dis);
                asm.row(id, RowKind::DamDownCeiling, Some(t), ceiling, Sense::Le, rhs)?;
            } else {
                let mut down: Vec<(VarId, f64)> = r[t].down().map(|c| (c, 1.0)).collect();
                down.extend([(ch[t], 1.0), (dis[t], -1.0)]);
                let rhs = cap(&mut down, p_ch);
                asm.row(id, RowKind::StorageDownReserve, Some(t), down, Sense::Le, rhs)?;
            }
        }
    }

    if let Some(&last) = e.last() {
        let mut end = vec![(last, 1.0)];
        let rhs = cap(&mut end, e0);
        asm.row(id, RowKind::StorageTerminal, None, end, Sense::Eq, rhs)?;
    }
    Ok(())
}
