//! Build decisions for candidate units and their links to operation.

use gep_milp::Sense;

use super::{Assembly, BuildError, Role, RowKind};
use crate::system::{CandidatePayload, CandidateUnit};
use crate::timegrid::TimeGrid;

/// One column per candidate, in id order: binary for thermal and storage,
/// built MW in `[0, invest_cap_max]` for renewables.
pub fn add_investment_variables(asm: &mut Assembly, candidates: &[CandidateUnit]) -> Result<(), BuildError> {
    let mut sorted: Vec<&CandidateUnit> = candidates.iter().collect();
    sorted.sort_by(|a, b| a.id().cmp(b.id()));
    for c in sorted {
        match c.payload {
            CandidatePayload::Res(_) => asm.continuous(c.id(), Role::Invest, None, 0.0, c.invest_cap_max)?,
            _ => asm.binary(c.id(), Role::Invest, None)?,
        };
    }
    Ok(())
}

/// Thermal candidates may only commit once built; renewable candidates
/// produce at most `CF * built MW`. Storage candidates carry their build
/// decision inside [`super::add_storage`].
pub fn add_investment_linking(asm: &mut Assembly, candidates: &[CandidateUnit], grid: &TimeGrid) -> Result<(), BuildError> {
    let mut sorted: Vec<&CandidateUnit> = candidates.iter().collect();
    sorted.sort_by(|a, b| a.id().cmp(b.id()));
    for c in sorted {
        let id = c.id();
        let inv = asm.registry.invest(id).expect("investment column exists");
        for t in 0..grid.simulated_hours {
            match &c.payload {
                CandidatePayload::Thermal(_) => {
                    let u = asm.registry.var(id, Role::On, t).expect("commitment column exists");
                    asm.row(id, RowKind::InvestOn, Some(t), vec![(u, 1.0), (inv, -1.0)], Sense::Le, 0.0)?;
                }
                CandidatePayload::Res(r) => {
                    let p = asm.registry.var(id, Role::ResProd, t).expect("production column exists");
                    let cf = r.capacity_factor[t];
                    asm.row(id, RowKind::ResCandidateCap, Some(t), vec![(p, 1.0), (inv, -cf)], Sense::Le, 0.0)?;
                }
                CandidatePayload::Storage(_) => {}
            }
        }
    }
    Ok(())
}
