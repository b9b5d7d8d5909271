//! Provably optimal depth-bounded decision trees by mixed-integer
//! optimization.
//!
//! Four fit pipelines share one flow-based formulation:
//!
//! * [`flow`] — plain classification trees with accuracy, weighted-accuracy,
//!   or worst-case (balanced) objectives.
//! * [`fairness`] — statistical parity, conditional statistical parity, or
//!   equalized odds side constraints with a tunable bound.
//! * [`robust`] — worst-case correctness under per-sample feature flips with
//!   costs and a budget, solved by outer cut generation.
//! * [`policy`] — treatment-assignment trees from observational data with
//!   IPW / direct-method / doubly-robust scores and optional capacity
//!   budgets.
//!
//! [`dataset`] ingests and binarizes tabular data, [`tree`] holds the
//! learned-tree model with routing and DOT/JSON export, and [`oracle`]
//! enumerates every valid small tree as the ground truth the test suites
//! compare against.

pub mod dataset;
pub mod error;
pub mod fairness;
pub mod flow;
pub mod greedy;
pub mod oracle;
pub mod policy;
pub mod robust;
pub mod tree;

pub use dataset::{
    binarize, load_csv, load_csv_path, validate, BinarizationSpec, BinarizedDataset, Cell,
    ColumnRole, DataDiagnostic, DataError, RawTable, RoleDecls, Task,
};
pub use error::FitError;
pub use fairness::{add_fairness_constraints, disparity, fit_fair, FairnessKind, FairnessSpec};
pub use flow::{
    build_flow_model, evaluate_objective, extract_plan, fit_classifier, FitResult, ModelHandles,
    OCTConfig, ObjectiveMode,
};
pub use greedy::greedy_tree;
pub use oracle::{best_plan, enumerate_plans, OracleError, PlanIterator};
pub use policy::{
    assignment_counts, build_policy_model, compute_scores, estimate_nuisances, fit_policy,
    policy_value, NuisanceEstimates, PolicyConfig, ScoreMatrix, ScoreMethod,
};
pub use robust::{
    fit_robust, fit_robust_capped, min_misclassification_cost, worst_case_correct, RobustSpec,
    Witness,
};
pub use tree::{NodeRole, PlanError, Topology, TreePlan};
