//! Solver-independent linear model: variables, linear constraints and a
//! minimization objective.
//!
//! The model is a faithful record of what the caller added. Nothing is
//! presolved, merged or reordered, so the rows a builder emitted can be
//! inspected exactly as written.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Maximum length of variable and constraint names (MPS limit).
pub const MAX_NAME_LEN: usize = 255;

/// Dense index of a variable inside a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Dense index of a constraint inside a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Continuous,
            lower,
            upper,
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 1.0,
        }
    }

    /// Nonnegative continuous variable without upper bound.
    pub fn nonneg(name: impl Into<String>) -> Self {
        Self::continuous(name, 0.0, f64::INFINITY)
    }

    pub fn free(name: impl Into<String>) -> Self {
        Self::continuous(name, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn is_binary(&self) -> bool {
        self.kind == VarKind::Binary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(name: impl Into<String>, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> Self {
        Self {
            name: name.into(),
            terms,
            sense,
            rhs,
        }
    }

    /// Left-hand side value at `values`.
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which the row is violated at `values` (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }

    pub fn coefficient(&self, var: VarId) -> Option<f64> {
        self.terms.iter().find(|(v, _)| *v == var).map(|&(_, a)| a)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("invalid name `{0}`: names must be 1..=255 characters without whitespace")]
    InvalidName(String),
    #[error("variable `{name}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("constraint `{constraint}` references unknown variable {var}")]
    UnknownVariable { constraint: String, var: VarId },
    #[error("constraint `{constraint}` lists variable {var} more than once")]
    RepeatedTerm { constraint: String, var: VarId },
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
    #[error("value vector has {got} entries, model has {expected} variables")]
    MissingValues { expected: usize, got: usize },
}

/// Objective value and worst infeasibility of a candidate point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    /// Largest violation over all constraints and variable bounds.
    pub max_violation: f64,
}

/// Linear minimization model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<f64>,
    objective_offset: f64,
    var_names: HashMap<String, VarId>,
    row_names: HashMap<String, RowId>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.len() <= MAX_NAME_LEN && !name.chars().any(char::is_whitespace)
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, var: Variable) -> Result<VarId, ModelError> {
        if !valid_name(&var.name) {
            return Err(ModelError::InvalidName(var.name));
        }
        if self.var_names.contains_key(&var.name) {
            return Err(ModelError::DuplicateVariable(var.name));
        }
        let bad_bounds = var.lower.is_nan()
            || var.upper.is_nan()
            || var.lower > var.upper
            || var.lower == f64::INFINITY
            || var.upper == f64::NEG_INFINITY
            || (var.is_binary() && (var.lower < 0.0 || var.upper > 1.0));
        if bad_bounds {
            return Err(ModelError::InvalidBounds {
                name: var.name,
                lower: var.lower,
                upper: var.upper,
            });
        }
        let id = VarId(self.variables.len());
        self.var_names.insert(var.name.clone(), id);
        self.variables.push(var);
        self.objective.push(0.0);
        Ok(id)
    }

    pub fn add_constraint(&mut self, row: Constraint) -> Result<RowId, ModelError> {
        if !valid_name(&row.name) {
            return Err(ModelError::InvalidName(row.name));
        }
        if self.row_names.contains_key(&row.name) {
            return Err(ModelError::DuplicateConstraint(row.name));
        }
        if !row.rhs.is_finite() {
            return Err(ModelError::NonFinite(row.name));
        }
        for (k, &(var, coeff)) in row.terms.iter().enumerate() {
            if var.0 >= self.variables.len() {
                return Err(ModelError::UnknownVariable {
                    constraint: row.name,
                    var,
                });
            }
            if !coeff.is_finite() {
                return Err(ModelError::NonFinite(row.name));
            }
            if row.terms[..k].iter().any(|&(other, _)| other == var) {
                return Err(ModelError::RepeatedTerm {
                    constraint: row.name,
                    var,
                });
            }
        }
        let id = RowId(self.constraints.len());
        self.row_names.insert(row.name.clone(), id);
        self.constraints.push(row);
        Ok(id)
    }

    /// Adds `coeff` to the objective coefficient of `var`.
    pub fn add_objective_term(&mut self, var: VarId, coeff: f64) {
        self.objective[var.0] += coeff;
    }

    pub fn set_objective_coefficient(&mut self, var: VarId, coeff: f64) {
        self.objective[var.0] = coeff;
    }

    pub fn set_objective_offset(&mut self, offset: f64) {
        self.objective_offset = offset;
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_coefficient(&self, var: VarId) -> f64 {
        self.objective[var.0]
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, id: RowId) -> &Constraint {
        &self.constraints[id.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn row_by_name(&self, name: &str) -> Option<RowId> {
        self.row_names.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.is_binary()).count()
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_binary())
            .map(|(i, _)| VarId(i))
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty() && self.constraints.is_empty()
    }

    /// Overrides the bounds of an existing variable.
    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) -> Result<(), ModelError> {
        let v = &self.variables[var.0];
        if lower.is_nan() || upper.is_nan() || lower > upper || (v.is_binary() && (lower < 0.0 || upper > 1.0)) {
            return Err(ModelError::InvalidBounds {
                name: v.name.clone(),
                lower,
                upper,
            });
        }
        let v = &mut self.variables[var.0];
        v.lower = lower;
        v.upper = upper;
        Ok(())
    }

    /// Turns a binary into a continuous variable, keeping its bounds.
    pub fn relax(&mut self, var: VarId) {
        self.variables[var.0].kind = VarKind::Continuous;
    }

    /// Objective value and worst constraint or bound violation at `values`.
    pub fn evaluate(&self, values: &[f64]) -> Result<Evaluation, ModelError> {
        if values.len() != self.variables.len() {
            return Err(ModelError::MissingValues {
                expected: self.variables.len(),
                got: values.len(),
            });
        }
        let objective = self.objective_offset
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>();
        let row_violation = self
            .constraints
            .iter()
            .map(|row| row.violation(values))
            .fold(0.0, f64::max);
        let bound_violation = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max);
        Ok(Evaluation {
            objective,
            max_violation: row_violation.max(bound_violation),
        })
    }
}
