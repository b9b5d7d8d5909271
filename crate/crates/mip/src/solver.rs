//! Public solve interface: configuration, results, and the `solve_lp` /
//! `solve_mip` entry points.

use std::time::Instant;

use thiserror::Error;

use crate::branch_bound;
use crate::model::{validate_model, Diagnostic, Model, ObjectiveSense, VarId};
use crate::simplex::{Engine, LpTermination, StdForm};

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    GapLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::GapLimit => "gap_limit",
            SolveStatus::TimeLimit => "time_limit",
        }
    }
}

/// Node selection strategy for branch-and-bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeSelection {
    #[default]
    BestBound,
    DepthFirst,
}

/// Branching variable choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchRule {
    /// Fractional part closest to one half; ties to the lowest variable id.
    #[default]
    MostFractional,
    /// Lowest id among fractional binaries.
    LowestIndex,
}

/// Solver tolerances and strategy knobs.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Relative optimality gap at which branch-and-bound stops.
    pub gap_tol: f64,
    /// Integrality tolerance for binary variables.
    pub int_tol: f64,
    /// LP feasibility tolerance.
    pub feas_tol: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub node_selection: NodeSelection,
    pub branch_rule: BranchRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gap_tol: 1e-6,
            int_tol: 1e-6,
            feas_tol: 1e-7,
            time_limit: None,
            node_selection: NodeSelection::BestBound,
            branch_rule: BranchRule::MostFractional,
        }
    }
}

/// Proof object attached to infeasible / unbounded outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Row implicated by the phase-I multipliers (or a dual-simplex exit).
    InfeasibleRow { index: usize, tag: String },
    /// Improving direction on the model variables.
    UnboundedRay(Vec<(VarId, f64)>),
}

/// Outcome of a solve. `objective` and `values` describe the incumbent; for
/// statuses without one (`infeasible`, `unbounded`, a timed-out search with no
/// feasible point) `values` is empty and `objective` is the worst value for
/// the model sense.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub values: Vec<f64>,
    pub nodes_explored: usize,
    pub wall_time: f64,
    pub certificate: Option<Certificate>,
    /// Proven bound recorded after each explored node (maximization:
    /// nonincreasing; minimization: nondecreasing).
    pub bound_trace: Vec<f64>,
}

impl SolveResult {
    /// Relative optimality gap of the incumbent.
    pub fn gap(&self) -> f64 {
        (self.best_bound - self.objective).abs() / self.objective.abs().max(1.0)
    }

    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("model failed validation: {}", format_diagnostics(.0))]
    InvalidModel(Vec<Diagnostic>),
    #[error("numerical failure: {0}")]
    Numerics(String),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn worst_objective(sense: ObjectiveSense) -> f64 {
    match sense {
        ObjectiveSense::Maximize => f64::NEG_INFINITY,
        ObjectiveSense::Minimize => f64::INFINITY,
    }
}

/// Solve the continuous relaxation of `model` (all variables treated as
/// continuous) with the bounded-variable primal simplex.
pub fn solve_lp(model: &Model, config: &SolverConfig) -> Result<SolveResult, SolveError> {
    let diags = validate_model(model);
    if !diags.is_empty() {
        return Err(SolveError::InvalidModel(diags));
    }
    let start = Instant::now();
    let form = StdForm::from_model(model);
    let mut engine = Engine::new(&form, config.feas_tol);
    engine.apply_bounds(&[]);
    let term = engine
        .cold_solve()
        .map_err(|e| SolveError::Numerics(format!("{e:?}")))?;
    Ok(package_lp(model, term, start))
}

pub(crate) fn package_lp(model: &Model, term: LpTermination, start: Instant) -> SolveResult {
    let sign = match model.sense() {
        ObjectiveSense::Maximize => -1.0,
        ObjectiveSense::Minimize => 1.0,
    };
    match term {
        LpTermination::Optimal {
            objective,
            dual_objective,
            x,
        } => SolveResult {
            status: SolveStatus::Optimal,
            objective: sign * objective,
            best_bound: sign * dual_objective,
            values: x,
            nodes_explored: 0,
            wall_time: start.elapsed().as_secs_f64(),
            certificate: None,
            bound_trace: Vec::new(),
        },
        LpTermination::Infeasible { row } => SolveResult {
            status: SolveStatus::Infeasible,
            objective: worst_objective(model.sense()),
            best_bound: worst_objective(model.sense()),
            values: Vec::new(),
            nodes_explored: 0,
            wall_time: start.elapsed().as_secs_f64(),
            certificate: Some(Certificate::InfeasibleRow {
                index: row,
                tag: model
                    .constraints()
                    .get(row)
                    .map(|c| c.tag.clone())
                    .unwrap_or_default(),
            }),
            bound_trace: Vec::new(),
        },
        LpTermination::Unbounded { ray } => SolveResult {
            status: SolveStatus::Unbounded,
            objective: -worst_objective(model.sense()),
            best_bound: -worst_objective(model.sense()),
            values: Vec::new(),
            nodes_explored: 0,
            wall_time: start.elapsed().as_secs_f64(),
            certificate: Some(Certificate::UnboundedRay(
                ray.into_iter().map(|(j, v)| (VarId(j), v)).collect(),
            )),
            bound_trace: Vec::new(),
        },
    }
}

/// Solve `model` to proven optimality with branch-and-bound over its binary
/// variables.
pub fn solve_mip(model: &Model, config: &SolverConfig) -> Result<SolveResult, SolveError> {
    solve_mip_warm(model, config, None)
}

/// [`solve_mip`] seeded with an initial assignment. The warm start is used as
/// the starting incumbent when it is feasible and integral; otherwise it is
/// silently ignored.
pub fn solve_mip_warm(
    model: &Model,
    config: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<SolveResult, SolveError> {
    let diags = validate_model(model);
    if !diags.is_empty() {
        return Err(SolveError::InvalidModel(diags));
    }
    branch_bound::solve(model, config, warm_start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConstraintSense;

    #[test]
    fn lp_single_binding_constraint() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x1 = m.add_continuous(0.0, 1.0);
        let x2 = m.add_continuous(0.0, 1.0);
        m.add_constraint(vec![(x1, 1.0), (x2, 1.0)], ConstraintSense::Le, 1.0, "cap");
        m.set_objective(vec![(x1, 1.0), (x2, 1.0)]);
        let r = solve_lp(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-9);
        assert!((r.objective - r.best_bound).abs() < 1e-6);
    }

    #[test]
    fn lp_invalid_model_is_an_error() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        m.add_continuous(2.0, 1.0);
        let err = solve_lp(&m, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, SolveError::InvalidModel(_)));
    }

    #[test]
    fn lp_infeasible_names_a_row() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_continuous(0.0, 1.0);
        m.add_constraint(vec![(x, 1.0)], ConstraintSense::Ge, 5.0, "impossible");
        m.set_objective(vec![(x, 1.0)]);
        let r = solve_lp(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        match r.certificate {
            Some(Certificate::InfeasibleRow { tag, .. }) => assert_eq!(tag, "impossible"),
            other => panic!("expected infeasible row, got {other:?}"),
        }
    }
}
