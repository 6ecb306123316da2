//! Linear and mixed-binary optimization models with a built-in solver.
//!
//! [`MilpModel`] is a faithful record of variables, rows and a minimization
//! objective; nothing is presolved. Models can be written to and read from
//! free-format MPS, and solved by a bounded-variable simplex plus
//! branch-and-bound (see [`solver`]).

pub mod model;
pub mod mps;
pub mod solver;

pub use model::{
    Constraint, Evaluation, MilpModel, ModelError, RowId, Sense, VarId, VarKind, Variable,
    MAX_NAME_LEN,
};
pub use mps::{parse_mps, write_mps, MpsError};
pub use solver::{
    enumerate_oracle, lp_certificate, read_solution_file, solve_lp, solve_milp, LpCertificate,
    SolveError, SolveOptions, Solution, Status,
};
