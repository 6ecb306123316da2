//! DC network: nodal balance, line flows from angle differences, and load
//! shedding.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use gep_milp::{Sense, VarId};

use super::{Assembly, BuildError, Role, RowKind};
use crate::system::{CandidatePayload, PowerSystem, ScenarioConfig};
use crate::timegrid::TimeGrid;

/// Injections attached to one bus.
#[derive(Default)]
struct BusUnits<'a> {
    thermal: Vec<(&'a str, f64)>,
    storage: Vec<&'a str>,
    res: Vec<&'a str>,
}

fn units_by_bus(system: &PowerSystem) -> BTreeMap<&str, BusUnits<'_>> {
    let mut map: BTreeMap<&str, BusUnits> = BTreeMap::new();
    for u in &system.thermal {
        map.entry(&u.bus).or_default().thermal.push((&u.id, u.p_min));
    }
    for u in &system.storage {
        map.entry(&u.bus).or_default().storage.push(&u.id);
    }
    for u in &system.res {
        map.entry(&u.bus).or_default().res.push(&u.id);
    }
    for c in &system.candidates {
        let entry = map.entry(c.bus()).or_default();
        match &c.payload {
            CandidatePayload::Thermal(u) => entry.thermal.push((&u.id, u.p_min)),
            CandidatePayload::Storage(u) => entry.storage.push(&u.id),
            CandidatePayload::Res(u) => entry.res.push(&u.id),
        }
    }
    for b in map.values_mut() {
        b.thermal.sort_by(|a, b| a.0.cmp(b.0));
        b.storage.sort_unstable();
        b.res.sort_unstable();
    }
    map
}

/// Buses whose angle is pinned to zero: the slack and every bus without
/// lines. Errors when a meshed component has no slack.
fn reference_buses<'a>(system: &'a PowerSystem, slack: &'a str) -> Result<BTreeSet<&'a str>, BuildError> {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for l in &system.lines {
        adj.entry(&l.from_bus).or_default().push(&l.to_bus);
        adj.entry(&l.to_bus).or_default().push(&l.from_bus);
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue = VecDeque::from([slack]);
    seen.insert(slack);
    while let Some(b) = queue.pop_front() {
        for &n in adj.get(b).into_iter().flatten() {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    let stranded: Vec<String> = system
        .buses
        .iter()
        .filter(|b| adj.contains_key(b.id.as_str()) && !seen.contains(b.id.as_str()))
        .map(|b| b.id.clone())
        .collect();
    if !stranded.is_empty() {
        return Err(BuildError::Disconnected {
            slack: slack.to_string(),
            buses: stranded,
        });
    }
    let mut fixed: BTreeSet<&str> = system
        .buses
        .iter()
        .filter(|b| !adj.contains_key(b.id.as_str()))
        .map(|b| b.id.as_str())
        .collect();
    fixed.insert(slack);
    Ok(fixed)
}

pub fn add_network(
    asm: &mut Assembly,
    system: &PowerSystem,
    config: &ScenarioConfig,
    grid: &TimeGrid,
) -> Result<(), BuildError> {
    if system.buses.is_empty() {
        return Ok(());
    }
    let slack = system.slack_bus(config).ok_or(BuildError::NoSlack)?;
    let fixed = reference_buses(system, slack)?;
    let hours = grid.simulated_hours;

    let mut buses: Vec<_> = system.buses.iter().collect();
    buses.sort_by(|a, b| a.id.cmp(&b.id));
    let mut lines: Vec<_> = system.lines.iter().collect();
    lines.sort_by(|a, b| a.id.cmp(&b.id));

    let mut angle: BTreeMap<&str, Vec<VarId>> = BTreeMap::new();
    let mut shed: BTreeMap<&str, Vec<VarId>> = BTreeMap::new();
    for b in &buses {
        let pinned = fixed.contains(b.id.as_str());
        for t in 0..hours {
            let ls = asm.continuous(&b.id, Role::LoadShed, Some(t), 0.0, b.demand[t].max(0.0))?;
            shed.entry(&b.id).or_default().push(ls);
            let d = if pinned {
                asm.continuous(&b.id, Role::Angle, Some(t), 0.0, 0.0)?
            } else {
                asm.continuous(&b.id, Role::Angle, Some(t), f64::NEG_INFINITY, f64::INFINITY)?
            };
            angle.entry(&b.id).or_default().push(d);
        }
    }
    let mut flow: Vec<Vec<VarId>> = Vec::with_capacity(lines.len());
    for l in &lines {
        let cols = (0..hours)
            .map(|t| asm.continuous(&l.id, Role::Flow, Some(t), -l.limit, l.limit))
            .collect::<Result<Vec<_>, _>>()?;
        flow.push(cols);
    }

    for (k, l) in lines.iter().enumerate() {
        let b = system.base_mva * l.susceptance;
        for t in 0..hours {
            let terms = vec![
                (flow[k][t], 1.0),
                (angle[l.from_bus.as_str()][t], -b),
                (angle[l.to_bus.as_str()][t], b),
            ];
            asm.row(&l.id, RowKind::LineFlow, Some(t), terms, Sense::Eq, 0.0)?;
        }
    }

    let units = units_by_bus(system);
    let empty = BusUnits::default();
    for b in &buses {
        let at = units.get(b.id.as_str()).unwrap_or(&empty);
        for t in 0..hours {
            let reg = &asm.registry;
            let var = |owner: &str, role| reg.var(owner, role, t).expect("unit columns exist");
            let mut terms: Vec<(VarId, f64)> = Vec::new();
            for &(id, p_min) in &at.thermal {
                terms.push((var(id, Role::On), p_min));
                terms.push((var(id, Role::AboveMin), 1.0));
            }
            for &id in &at.storage {
                terms.push((var(id, Role::Discharge), 1.0));
                terms.push((var(id, Role::Charge), -1.0));
            }
            for &id in &at.res {
                terms.push((var(id, Role::ResProd), 1.0));
            }
            terms.push((shed[b.id.as_str()][t], 1.0));
            for (k, l) in lines.iter().enumerate() {
                if l.from_bus == b.id {
                    terms.push((flow[k][t], -1.0));
                }
                if l.to_bus == b.id {
                    terms.push((flow[k][t], 1.0));
                }
            }
            let rhs = b.demand[t] - b.fixed_injection[t];
            asm.row(&b.id, RowKind::Balance, Some(t), terms, Sense::Eq, rhs)?;
        }
    }
    Ok(())
}
