//! Flag definitions for the four subcommands.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "optree",
    version,
    about = "Provably optimal depth-bounded decision trees by mixed-integer optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Learn a tree and write manifest.json, tree.json and tree.dot.
    Fit(FitArgs),
    /// Apply a saved tree to a data file; prints a predictions CSV.
    Predict(PredictArgs),
    /// Print a saved tree as a DOT digraph.
    Visualize(VisualizeArgs),
    /// Compute metrics of a saved tree on a data file.
    Evaluate(EvaluateArgs),
}

/// Column-role flags shared by fit and evaluate. Roles not set here (or in
/// `--roles`) fall back to the conventional column names `y`, `protected`,
/// `legitimate`, `treatment`, `outcome` where the task needs them.
#[derive(Args, Debug, Clone)]
pub struct RoleFlags {
    /// Label column (classification tasks).
    #[arg(long)]
    pub label: Option<String>,
    /// Protected-attribute column (fairness).
    #[arg(long)]
    pub protected: Option<String>,
    /// Legitimate-factor column (conditional statistical parity).
    #[arg(long)]
    pub legitimate: Option<String>,
    /// Treatment column (policy task).
    #[arg(long)]
    pub treatment: Option<String>,
    /// Outcome column (policy task).
    #[arg(long)]
    pub outcome: Option<String>,
    /// Key-value file with one `column=role` line per declaration.
    #[arg(long)]
    pub roles: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// One of: classify, fair, robust, policy.
    #[arg(long)]
    pub task: String,
    /// Training data (CSV with a header row).
    #[arg(long)]
    pub data: PathBuf,
    /// Tree depth (at least 1).
    #[arg(long)]
    pub depth: u32,
    /// Sparsity trade-off in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Objective: accuracy, weighted, or worst-case.
    #[arg(long, default_value = "accuracy")]
    pub objective: String,

    #[command(flatten)]
    pub roles: RoleFlags,

    /// Fairness constraint type: SP, CSP, or EqOdds.
    #[arg(long)]
    pub fairness_type: Option<String>,
    /// Allowed disparity bound in [0, 1].
    #[arg(long)]
    pub fairness_bound: Option<f64>,
    /// Label value treated as the positive prediction.
    #[arg(long)]
    pub positive_class: Option<String>,

    /// Flip-cost matrix CSV (same shape as the binarized features).
    #[arg(long)]
    pub costs: Option<PathBuf>,
    /// Per-sample adversary budget.
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Precomputed score matrix CSV (n rows, one column per treatment).
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Counterfactual estimator when scores are not given: ipw, dm, or dr.
    #[arg(long, default_value = "dr")]
    pub score_method: String,
    /// Laplace smoothing for the built-in nuisance estimator.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Treatment capacity, `TREATMENT=COUNT`; repeatable.
    #[arg(long = "budget")]
    pub budgets: Vec<String>,

    /// Wall-clock limit in seconds (default: OPTREE_TIME_LIMIT if set).
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Relative optimality gap tolerance.
    #[arg(long)]
    pub gap_tol: Option<f64>,

    /// Output directory for manifest.json, tree.json, tree.dot.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Also export the optimization model as model.lp.
    #[arg(long)]
    pub write_lp: bool,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Tree JSON written by `fit`.
    #[arg(long)]
    pub tree: PathBuf,
    /// Data CSV; feature columns must binarize to the width the tree expects.
    #[arg(long)]
    pub data: PathBuf,

    #[command(flatten)]
    pub roles: RoleFlags,

    /// Output CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VisualizeArgs {
    /// Tree JSON written by `fit`.
    #[arg(long)]
    pub tree: PathBuf,
    /// Feature names, comma separated (default: f0, f1, ...).
    #[arg(long)]
    pub feature_names: Option<String>,
    /// Label names, comma separated (default: 0, 1, ...).
    #[arg(long)]
    pub label_names: Option<String>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Tree JSON written by `fit`.
    #[arg(long)]
    pub tree: PathBuf,
    /// Data CSV to score against.
    #[arg(long)]
    pub data: PathBuf,
    /// One of: classify, fair, robust, policy.
    #[arg(long, default_value = "classify")]
    pub task: String,
    /// Sparsity trade-off used in the reported objective.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Objective: accuracy, weighted, or worst-case.
    #[arg(long, default_value = "accuracy")]
    pub objective: String,

    #[command(flatten)]
    pub roles: RoleFlags,

    #[arg(long)]
    pub fairness_type: Option<String>,
    #[arg(long)]
    pub fairness_bound: Option<f64>,
    #[arg(long)]
    pub positive_class: Option<String>,

    #[arg(long)]
    pub costs: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: Option<f64>,

    #[arg(long)]
    pub scores: Option<PathBuf>,

    /// Cross-check the tree against exhaustive enumeration (depth <= 3).
    #[arg(long)]
    pub oracle: bool,
}
