//! Generic linear mixed-integer optimization with an embedded exact solver.
//!
//! The crate provides three layers:
//!
//! * [`model`] — a plain representation of bounded variables, linear
//!   constraints and a linear objective, plus [`validate_model`].
//! * [`solver`] — [`solve_lp`] (bounded-variable primal simplex) and
//!   [`solve_mip`] (deterministic branch-and-bound over binary variables,
//!   warm-startable with an initial assignment).
//! * [`lp_format`] — LP text export via [`write_lp_file`] and an independent
//!   reader for round-trips and hand-written files.
//!
//! Solves are single-threaded and deterministic: same model, same
//! configuration, same result. Models are immutable once handed to a solver
//! and can be shared read-only across threads.

pub mod lp_format;
pub mod model;
pub mod solver;

mod branch_bound;
mod simplex;

pub use lp_format::{parse_lp_str, write_lp_file, write_lp_string, LpParseError};
pub use model::{
    validate_model, ConstraintSense, Diagnostic, LinearConstraint, Model, ObjectiveSense, VarId,
    VarKind, Variable,
};
pub use solver::{
    solve_lp, solve_mip, solve_mip_warm, BranchRule, Certificate, NodeSelection, SolveError,
    SolveResult, SolveStatus, SolverConfig,
};
