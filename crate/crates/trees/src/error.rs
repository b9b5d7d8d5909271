//! Errors shared by the fit pipelines.

use thiserror::Error;

use crate::dataset::DataDiagnostic;
use crate::tree::PlanError;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("dataset rejected: {}", format_diags(.0))]
    InvalidDataset(Vec<DataDiagnostic>),
    #[error("bad configuration: {0}")]
    InvalidConfig(String),
    #[error("solver: {0}")]
    Solver(#[from] optree_mip::SolveError),
    #[error("problem is infeasible")]
    Infeasible,
    #[error("search stopped before any feasible tree was found")]
    NoIncumbent,
    #[error("incumbent is not integral: {0}")]
    NonIntegral(String),
    #[error("node {node} carries more than one label assignment")]
    MultipleLabels { node: usize },
    #[error("extracted plan is malformed: {0}")]
    Plan(#[from] PlanError),
    #[error("solver/evaluator mismatch: {0}")]
    Inconsistent(String),
    #[error("fairness: {0}")]
    Fairness(String),
    #[error("robustness: {0}")]
    Robustness(String),
    #[error("scores: {0}")]
    Scores(String),
    #[error("nuisance estimation with alpha=0 would divide by an empty cell ({0})")]
    DivisionHazard(String),
}

fn format_diags(diags: &[DataDiagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
