//! Seeded random model generators shared by the integration tests.

use gep_milp::{Constraint, MilpModel, Sense, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Shape {
    pub continuous: usize,
    pub binaries: usize,
    pub rows: usize,
    /// Allow free and half-bounded continuous variables.
    pub open_bounds: bool,
    /// One row in `perturb_one_in` gets an infeasible shift; 0 disables.
    pub perturb_one_in: u32,
}

/// Builds a random sparse model. Right-hand sides are set from a random
/// reference point, so most instances are feasible; a few rows are then
/// perturbed to produce infeasible ones as well.
pub fn random_model(seed: u64, shape: &Shape) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = MilpModel::new();
    let mut point = Vec::new();
    for b in 0..shape.binaries {
        let id = m.add_variable(Variable::binary(format!("y{b}"))).unwrap();
        m.add_objective_term(id, rng.gen_range(-10..=10) as f64);
        point.push(rng.gen_range(0..=1) as f64);
    }
    for c in 0..shape.continuous {
        let lo = rng.gen_range(-5..=0) as f64;
        let up = lo + rng.gen_range(1..=20) as f64;
        let (lo, up) = if shape.open_bounds {
            match rng.gen_range(0..6) {
                0 => (f64::NEG_INFINITY, f64::INFINITY),
                1 => (lo, f64::INFINITY),
                2 => (f64::NEG_INFINITY, up),
                _ => (lo, up),
            }
        } else {
            (lo, up)
        };
        let id = m
            .add_variable(Variable::continuous(format!("x{c}"), lo, up))
            .unwrap();
        m.add_objective_term(id, rng.gen_range(-20..=20) as f64 / 2.0);
        let (a, b) = (lo.max(-5.0), up.min(15.0));
        point.push(if a < b { rng.gen_range(a..b) } else { a });
    }
    let n = m.num_vars();
    for r in 0..shape.rows {
        let k = rng.gen_range(1..=4.min(n.max(1)));
        let mut vars: Vec<usize> = Vec::new();
        while vars.len() < k && n > 0 {
            let v = rng.gen_range(0..n);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.sort_unstable();
        let terms: Vec<_> = vars
            .iter()
            .map(|&v| (gep_milp::VarId(v), rng.gen_range(-9..=9) as f64 + 0.5))
            .collect();
        let act: f64 = terms.iter().map(|&(v, a)| a * point[v.0]).sum();
        let sense = match rng.gen_range(0..5) {
            0 => Sense::Eq,
            1 | 2 => Sense::Le,
            _ => Sense::Ge,
        };
        let slack = rng.gen_range(0..=3) as f64;
        let mut rhs = match sense {
            Sense::Le => act + slack,
            Sense::Ge => act - slack,
            Sense::Eq => act,
        };
        if shape.perturb_one_in > 0 && rng.gen_range(0..shape.perturb_one_in) == 0 {
            rhs += match sense {
                Sense::Le => -200.0,
                _ => 200.0,
            };
        }
        m.add_constraint(Constraint::new(format!("r{r}"), terms, sense, rhs))
            .unwrap();
    }
    m.set_objective_offset(rng.gen_range(-3..=3) as f64);
    m
}

#[allow(dead_code)]
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
