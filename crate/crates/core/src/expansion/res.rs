//! Renewable production with free curtailment.

use super::{Assembly, BuildError, Role};
use crate::system::ResUnit;
use crate::timegrid::TimeGrid;

/// Existing units are capped by `CF * P^max` through column bounds. For a
/// candidate the cap depends on the built capacity and is added as a row by
/// [`super::add_investment_linking`].
pub fn add_res(asm: &mut Assembly, unit: &ResUnit, grid: &TimeGrid, candidate: bool) -> Result<(), BuildError> {
    for t in 0..grid.simulated_hours {
        let cf = unit.capacity_factor[t];
        let upper = if candidate {
            if cf > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            cf * unit.p_max
        };
        asm.continuous(&unit.id, Role::ResProd, Some(t), 0.0, upper)?;
    }
    Ok(())
}
