//! Thermal unit commitment: on/start/stop binaries, output above minimum,
//! and reserve columns for eligible units.

use gep_milp::{Sense, VarId};

use super::reserves::{reserve_columns, ReserveColumns};
use super::{Assembly, BuildError, Role, RowKind};
use crate::system::ThermalUnit;
use crate::timegrid::TimeGrid;

pub fn add_thermal_uc(asm: &mut Assembly, unit: &ThermalUnit, grid: &TimeGrid) -> Result<(), BuildError> {
    let hours = grid.simulated_hours;
    let id = unit.id.as_str();
    let mut u = Vec::with_capacity(hours);
    let mut v = Vec::with_capacity(hours);
    let mut w = Vec::with_capacity(hours);
    let mut p = Vec::with_capacity(hours);
    let mut r: Vec<ReserveColumns> = Vec::with_capacity(hours);
    for t in 0..hours {
        u.push(asm.binary(id, Role::On, Some(t))?);
        v.push(asm.binary(id, Role::Start, Some(t))?);
        w.push(asm.binary(id, Role::Stop, Some(t))?);
        p.push(asm.continuous(id, Role::AboveMin, Some(t), 0.0, f64::INFINITY)?);
        r.push(reserve_columns(asm, id, t, unit.scr_eligible, unit.tcr_eligible)?);
    }

    let span = unit.p_max - unit.p_min;
    let su = unit.p_max - unit.startup_cap;
    let sd = unit.p_max - unit.shutdown_cap;
    let maintained = unit.availability.iter().any(|&s| s < 1.0);

    for t in 0..hours {
        let mut down = vec![(p[t], 1.0)];
        down.extend(r[t].down().map(|c| (c, -1.0)));
        asm.row(id, RowKind::DownGen, Some(t), down, Sense::Ge, 0.0)?;

        let mut up: Vec<(VarId, f64)> = vec![(p[t], 1.0)];
        up.extend(r[t].up().map(|c| (c, 1.0)));
        up.push((u[t], -span));
        let next_stop = w.get(t + 1).map(|&wn| (wn, sd));
        if unit.min_up <= 1 {
            let mut start = up.clone();
            start.push((v[t], su));
            asm.row(id, RowKind::UpGenStart, Some(t), start, Sense::Le, 0.0)?;
            let mut stop = up;
            stop.extend(next_stop);
            asm.row(id, RowKind::UpGenStop, Some(t), stop, Sense::Le, 0.0)?;
        } else {
            up.push((v[t], su));
            up.extend(next_stop);
            asm.row(id, RowKind::UpGen, Some(t), up, Sense::Le, 0.0)?;
        }

        let mut logic = vec![(u[t], -1.0), (v[t], 1.0), (w[t], -1.0)];
        let rhs = if t == 0 {
            if unit.initial_on {
                -1.0
            } else {
                0.0
            }
        } else {
            logic.push((u[t - 1], 1.0));
            0.0
        };
        asm.row(id, RowKind::Logic, Some(t), logic, Sense::Eq, rhs)?;

        if maintained {
            asm.row(id, RowKind::Maintenance, Some(t), vec![(u[t], 1.0)], Sense::Le, unit.availability[t])?;
        }

        if t >= 1 {
            asm.row(id, RowKind::RampUp, Some(t), vec![(p[t], 1.0), (p[t - 1], -1.0)], Sense::Le, unit.ramp_up)?;
            asm.row(id, RowKind::RampDown, Some(t), vec![(p[t - 1], 1.0), (p[t], -1.0)], Sense::Le, unit.ramp_down)?;
        }

        // history before the horizon counts as long enough
        let first = (t + 1).saturating_sub(unit.min_up);
        let mut min_up: Vec<(VarId, f64)> = (first..=t).map(|i| (v[i], 1.0)).collect();
        min_up.push((u[t], -1.0));
        asm.row(id, RowKind::MinUp, Some(t), min_up, Sense::Le, 0.0)?;
        let first = (t + 1).saturating_sub(unit.min_down);
        let mut min_down: Vec<(VarId, f64)> = (first..=t).map(|i| (w[i], 1.0)).collect();
        min_down.push((u[t], 1.0));
        asm.row(id, RowKind::MinDown, Some(t), min_down, Sense::Le, 1.0)?;
    }
    Ok(())
}
