//! Optimality certificate for LP solutions: rebuilds the dual objective from
//! row duals and measures the residuals of the KKT conditions.

use super::Solution;
use crate::model::{MilpModel, Sense};

#[derive(Debug, Clone, PartialEq)]
pub struct LpCertificate {
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|primal - dual|`.
    pub gap: f64,
    /// Largest `|dual * slack|` over rows and `|reduced cost * distance to
    /// the active bound|` over columns.
    pub complementary_slackness: f64,
    /// Largest violation of the dual sign rules (rows by sense, reduced costs
    /// against infinite bounds).
    pub dual_infeasibility: f64,
    /// Largest primal row or bound violation.
    pub primal_infeasibility: f64,
}

/// Returns `None` when the solution carries no duals.
pub fn lp_certificate(model: &MilpModel, solution: &Solution) -> Option<LpCertificate> {
    let y = solution.duals.as_ref()?;
    let x = &solution.values;
    let mut reduced: Vec<f64> = model.objective().to_vec();
    let mut dual_obj = model.objective_offset();
    let mut cs = 0.0f64;
    let mut dual_inf = 0.0f64;
    let mut primal_inf = 0.0f64;

    for (row, &yi) in model.constraints().iter().zip(y) {
        for &(v, a) in &row.terms {
            reduced[v.0] -= yi * a;
        }
        dual_obj += yi * row.rhs;
        let slack = row.activity(x) - row.rhs;
        cs = cs.max((yi * slack).abs());
        primal_inf = primal_inf.max(row.violation(x));
        let wrong_sign = match row.sense {
            Sense::Ge => (-yi).max(0.0),
            Sense::Le => yi.max(0.0),
            Sense::Eq => 0.0,
        };
        dual_inf = dual_inf.max(wrong_sign);
    }
    for ((var, &d), &xj) in model.variables().iter().zip(&reduced).zip(x) {
        primal_inf = primal_inf.max(var.lower - xj).max(xj - var.upper);
        // d > 0 is supported by the lower bound, d < 0 by the upper one
        let bound = if d >= 0.0 { var.lower } else { var.upper };
        if bound.is_finite() {
            dual_obj += d * bound;
            cs = cs.max((d * (xj - bound)).abs());
        } else {
            dual_inf = dual_inf.max(d.abs());
            dual_obj += d * xj;
        }
    }
    let primal = solution.objective;
    Some(LpCertificate {
        primal_objective: primal,
        dual_objective: dual_obj,
        gap: (primal - dual_obj).abs(),
        complementary_slackness: cs,
        dual_infeasibility: dual_inf,
        primal_infeasibility: primal_inf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, Variable};
    use crate::solver::{solve_lp, SolveOptions};

    #[test]
    fn certificate_of_box_lp() {
        let mut m = MilpModel::new();
        let a = m.add_variable(Variable::continuous("a", 0.0, 60.0)).unwrap();
        let b = m.add_variable(Variable::continuous("b", 0.0, 60.0)).unwrap();
        m.add_objective_term(a, 20.0);
        m.add_objective_term(b, 40.0);
        m.set_objective_offset(7.0);
        m.add_constraint(Constraint::new("bal", vec![(a, 1.0), (b, 1.0)], Sense::Eq, 100.0))
            .unwrap();
        let s = solve_lp(&m, &SolveOptions::default()).unwrap();
        let c = lp_certificate(&m, &s).unwrap();
        // dual: 40*100 + (20-40)*60 + 7
        assert!((c.dual_objective - 2807.0).abs() < 1e-9);
        assert!(c.gap < 1e-9);
        assert!(c.complementary_slackness < 1e-9);
        assert_eq!(c.dual_infeasibility, 0.0);
    }
}
