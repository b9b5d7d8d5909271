//! Flow-based mixed-integer formulation for optimal classification trees.
//!
//! Every sample contributes one unit of flow pushed from a source through the
//! tree edges into per-node, per-class sinks. Branch decisions gate the edges
//! (a sample may only cross toward the side its feature value selects) and
//! label assignments gate the sinks, so a correctly classified sample is one
//! whose unit of flow lands in a sink matching its true label. The per-class
//! sinks keep predicted-class counts linear, which is what the fairness and
//! prescriptive pipelines build on.
//!
//! Node roles are encoded by three binary families: `b[n,f]` (node `n`
//! branches on feature `f`), `p[n]` (node `n` predicts), and `w[n,k]` (node
//! `n` predicts class `k`), tied together by the structural rows
//!
//! ```text
//!   sum_f b[n,f] + p[n] + sum_{m in ancestors(n)} p[m] = 1   (branch nodes)
//!   p[n] + sum_{m in ancestors(n)} p[m] = 1                  (leaves)
//!   sum_k w[n,k] = p[n]                                      (all nodes)
//! ```
//!
//! so each node branches, predicts, or sits pruned below a predictor.

use optree_mip::{
    solve_mip_warm, ConstraintSense, Model, ObjectiveSense, SolveResult, SolveStatus,
    SolverConfig, VarId,
};

use crate::dataset::{validate, BinarizedDataset, Task};
use crate::error::FitError;
use crate::greedy::greedy_tree;
use crate::tree::{NodeRole, Topology, TreePlan};

/// Objective flavor for classification fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveMode {
    /// Weighted correct-classification count (weights default to one).
    #[default]
    Accuracy,
    /// Same objective, named for datasets with explicit sample weights.
    Weighted,
    /// Worst per-class recall.
    WorstCase,
}

/// Configuration for the classification fits.
#[derive(Debug, Clone)]
pub struct OCTConfig {
    pub depth: u32,
    /// Sparsity trade-off in `[0, 1)`: the objective is
    /// `(1 - lambda) * correctness - lambda * branch_count`.
    pub lambda: f64,
    pub objective: ObjectiveMode,
    pub solver: SolverConfig,
}

impl OCTConfig {
    pub fn new(depth: u32, lambda: f64) -> OCTConfig {
        // Root-first branching collapses tree-structured models far faster
        // than most-fractional; both rules are deterministic.
        let solver = SolverConfig {
            branch_rule: optree_mip::BranchRule::LowestIndex,
            ..SolverConfig::default()
        };
        OCTConfig {
            depth,
            lambda,
            objective: ObjectiveMode::Accuracy,
            solver,
        }
    }

    pub(crate) fn check(&self) -> Result<(), FitError> {
        if self.depth == 0 {
            return Err(FitError::InvalidConfig("depth must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(FitError::InvalidConfig(format!(
                "lambda must lie in [0, 1), got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Variable-id bookkeeping for a built flow model.
#[derive(Debug, Clone)]
pub struct ModelHandles {
    pub topology: Topology,
    pub num_features: usize,
    pub num_classes: usize,
    /// `b[branch_node - 1][feature]`.
    pub b: Vec<Vec<VarId>>,
    /// `p[node - 1]`.
    pub p: Vec<VarId>,
    /// `w[node - 1][class]`.
    pub w: Vec<Vec<VarId>>,
    /// Source arc of each sample.
    pub source: Vec<VarId>,
    /// `(left, right)` edge flows per sample and branch node.
    pub edge: Vec<Vec<(VarId, VarId)>>,
    /// Sink flow per sample, node, class.
    pub sink: Vec<Vec<Vec<VarId>>>,
    /// Worst-case auxiliary, present in `WorstCase` mode.
    pub gamma: Option<VarId>,
}

/// Shared structure: routing variables and constraints without an objective.
/// `classes` is the sink arity (labels for classification, treatments for
/// policy fits).
pub(crate) fn build_flow_core(
    x: &[Vec<u8>],
    classes: usize,
    depth: u32,
) -> (Model, ModelHandles) {
    let topo = Topology::new(depth);
    let n = x.len();
    let num_features = x.first().map(|r| r.len()).unwrap_or(0);
    let mut model = Model::new(ObjectiveSense::Maximize);

    let b: Vec<Vec<VarId>> = topo
        .branch_nodes()
        .map(|_| (0..num_features).map(|_| model.add_binary()).collect())
        .collect();
    let p: Vec<VarId> = topo.all_nodes().map(|_| model.add_binary()).collect();
    let w: Vec<Vec<VarId>> = topo
        .all_nodes()
        .map(|_| (0..classes).map(|_| model.add_binary()).collect())
        .collect();
    let source: Vec<VarId> = (0..n).map(|_| model.add_continuous(0.0, 1.0)).collect();
    let edge: Vec<Vec<(VarId, VarId)>> = (0..n)
        .map(|_| {
            topo.branch_nodes()
                .map(|_| {
                    (
                        model.add_continuous(0.0, 1.0),
                        model.add_continuous(0.0, 1.0),
                    )
                })
                .collect()
        })
        .collect();
    let sink: Vec<Vec<Vec<VarId>>> = (0..n)
        .map(|_| {
            topo.all_nodes()
                .map(|_| (0..classes).map(|_| model.add_continuous(0.0, 1.0)).collect())
                .collect()
        })
        .collect();

    // Structural rows: branch/predict/prune trichotomy, then label assignment.
    for node in topo.branch_nodes() {
        let mut terms: Vec<(VarId, f64)> = b[node - 1].iter().map(|&v| (v, 1.0)).collect();
        terms.push((p[node - 1], 1.0));
        for anc in topo.ancestors(node) {
            terms.push((p[anc - 1], 1.0));
        }
        model.add_constraint(terms, ConstraintSense::Eq, 1.0, format!("struct_branch_n{node}"));
    }
    for node in topo.leaf_nodes() {
        let mut terms = vec![(p[node - 1], 1.0)];
        for anc in topo.ancestors(node) {
            terms.push((p[anc - 1], 1.0));
        }
        model.add_constraint(terms, ConstraintSense::Eq, 1.0, format!("struct_leaf_n{node}"));
    }
    for node in topo.all_nodes() {
        let mut terms: Vec<(VarId, f64)> = w[node - 1].iter().map(|&v| (v, 1.0)).collect();
        terms.push((p[node - 1], -1.0));
        model.add_constraint(terms, ConstraintSense::Eq, 0.0, format!("assign_n{node}"));
    }

    // Flow conservation at every node of every sample.
    for i in 0..n {
        for node in topo.all_nodes() {
            let inflow = if node == 1 {
                source[i]
            } else {
                let parent = topo.parent(node).expect("non-root has a parent");
                let (l, r) = edge[i][parent - 1];
                if node % 2 == 0 {
                    l
                } else {
                    r
                }
            };
            let mut terms = vec![(inflow, 1.0)];
            if topo.is_branch_node(node) {
                let (l, r) = edge[i][node - 1];
                terms.push((l, -1.0));
                terms.push((r, -1.0));
            }
            for &s in &sink[i][node - 1] {
                terms.push((s, -1.0));
            }
            model.add_constraint(terms, ConstraintSense::Eq, 0.0, format!("flow_i{i}_n{node}"));
        }
    }

    // Capacities: edges open only toward the side the branch feature selects,
    // sinks open only for the assigned label.
    for i in 0..n {
        for node in topo.branch_nodes() {
            let (l, r) = edge[i][node - 1];
            let mut left_terms = vec![(l, 1.0)];
            for (f, &bv) in b[node - 1].iter().enumerate() {
                if x[i][f] == 0 {
                    left_terms.push((bv, -1.0));
                }
            }
            model.add_constraint(
                left_terms,
                ConstraintSense::Le,
                0.0,
                format!("cap_left_i{i}_n{node}"),
            );
            let mut right_terms = vec![(r, 1.0)];
            for (f, &bv) in b[node - 1].iter().enumerate() {
                if x[i][f] == 1 {
                    right_terms.push((bv, -1.0));
                }
            }
            model.add_constraint(
                right_terms,
                ConstraintSense::Le,
                0.0,
                format!("cap_right_i{i}_n{node}"),
            );
        }
        for node in topo.all_nodes() {
            for k in 0..classes {
                model.add_constraint(
                    vec![(sink[i][node - 1][k], 1.0), (w[node - 1][k], -1.0)],
                    ConstraintSense::Le,
                    0.0,
                    format!("cap_sink_i{i}_n{node}_k{k}"),
                );
            }
        }
    }

    // Every sample pushes exactly one unit: an equality so that sink totals
    // are exact predicted-class indicators, not just upper bounds.
    for (i, &s) in source.iter().enumerate() {
        model.add_constraint(vec![(s, 1.0)], ConstraintSense::Eq, 1.0, format!("source_i{i}"));
    }

    let handles = ModelHandles {
        topology: topo,
        num_features,
        num_classes: classes,
        b,
        p,
        w,
        source,
        edge,
        sink,
        gamma: None,
    };
    (model, handles)
}

/// Build the classification flow model for `dataset` under `config`.
pub fn build_flow_model(
    dataset: &BinarizedDataset,
    config: &OCTConfig,
) -> Result<(Model, ModelHandles), FitError> {
    config.check()?;
    let diags = validate(dataset, Task::Classification);
    if !diags.is_empty() {
        return Err(FitError::InvalidDataset(diags));
    }
    let y = dataset.y.as_ref().expect("validated");
    let k = dataset.num_classes();
    let (mut model, mut handles) = build_flow_core(&dataset.x, k, config.depth);

    let lam = config.lambda;
    let mut objective: Vec<(VarId, f64)> = Vec::new();
    match config.objective {
        ObjectiveMode::Accuracy | ObjectiveMode::Weighted => {
            for (i, &yi) in y.iter().enumerate() {
                let u = dataset.weights[i];
                for node in handles.topology.all_nodes() {
                    objective.push((handles.sink[i][node - 1][yi], (1.0 - lam) * u));
                }
            }
        }
        ObjectiveMode::WorstCase => {
            let gamma = model.add_continuous(0.0, 1.0);
            handles.gamma = Some(gamma);
            for k_class in 0..k {
                let members: Vec<usize> =
                    (0..dataset.n()).filter(|&i| y[i] == k_class).collect();
                if members.is_empty() {
                    continue;
                }
                let share = 1.0 / members.len() as f64;
                let mut terms = vec![(gamma, 1.0)];
                for &i in &members {
                    for node in handles.topology.all_nodes() {
                        terms.push((handles.sink[i][node - 1][k_class], -share));
                    }
                }
                model.add_constraint(
                    terms,
                    ConstraintSense::Le,
                    0.0,
                    format!("worstcase_k{k_class}"),
                );
            }
            objective.push((gamma, 1.0 - lam));
        }
    }
    for row in &handles.b {
        for &bv in row {
            objective.push((bv, -lam));
        }
    }
    model.set_objective(objective);
    Ok((model, handles))
}

/// Outcome of a fit: the extracted plan, its objective re-evaluated by pure
/// traversal, and the raw solver result. `limited` marks searches stopped by
/// a time/gap limit (or, for the robust pipeline, its round cap); the plan is
/// then the best incumbent, not a proven optimum.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub plan: TreePlan,
    pub objective: f64,
    pub solve: SolveResult,
    pub limited: bool,
    /// Number of mixed-integer solves (one except for cut-generation loops).
    pub solves: usize,
}

/// Map an integral solution back to node roles.
///
/// Rounding ambiguity resolves to the lowest feature/label index; a node with
/// two assigned labels is a consistency error.
pub fn extract_plan(
    handles: &ModelHandles,
    solve: &SolveResult,
    topology: Topology,
) -> Result<TreePlan, FitError> {
    extract_plan_parts(&handles.b, &handles.p, &handles.w, &solve.values, topology)
}

pub(crate) fn extract_plan_parts(
    b: &[Vec<VarId>],
    p: &[VarId],
    w: &[Vec<VarId>],
    values: &[f64],
    topology: Topology,
) -> Result<TreePlan, FitError> {
    const INT_TOL: f64 = 1e-4;
    let read = |v: VarId| -> Result<u8, FitError> {
        let raw = values
            .get(v.index())
            .copied()
            .ok_or_else(|| FitError::NonIntegral(format!("missing value for {v}")))?;
        let rounded = raw.round();
        if (raw - rounded).abs() > INT_TOL || !(rounded == 0.0 || rounded == 1.0) {
            return Err(FitError::NonIntegral(format!("{v} = {raw}")));
        }
        Ok(rounded as u8)
    };

    let mut roles = vec![NodeRole::Pruned; topology.num_nodes()];
    for node in topology.all_nodes() {
        let branch_feature = if topology.is_branch_node(node) {
            let mut hit = None;
            for (f, &bv) in b[node - 1].iter().enumerate() {
                if read(bv)? == 1 {
                    hit = Some(f);
                    break; // lowest feature index wins
                }
            }
            hit
        } else {
            None
        };
        if let Some(f) = branch_feature {
            roles[node - 1] = NodeRole::Branch(f);
            continue;
        }
        if read(p[node - 1])? == 1 {
            let mut label = None;
            for (k, &wv) in w[node - 1].iter().enumerate() {
                if read(wv)? == 1 {
                    if label.is_some() {
                        return Err(FitError::MultipleLabels { node });
                    }
                    label = Some(k);
                }
            }
            match label {
                Some(k) => roles[node - 1] = NodeRole::Predict(k),
                None => {
                    return Err(FitError::NonIntegral(format!(
                        "node {node} predicts but has no label"
                    )))
                }
            }
        }
    }
    Ok(TreePlan::new(topology.depth(), roles)?)
}

/// Objective of `plan` on `dataset` computed by pure traversal (never through
/// the optimizer).
pub fn evaluate_objective(plan: &TreePlan, dataset: &BinarizedDataset, config: &OCTConfig) -> f64 {
    let y = dataset.y.as_ref().expect("classification dataset");
    let lam = config.lambda;
    let branches = plan.branch_count() as f64;
    match config.objective {
        ObjectiveMode::Accuracy | ObjectiveMode::Weighted => {
            let mut correct = 0.0;
            for (i, row) in dataset.x.iter().enumerate() {
                let pred = plan.predict_row(row).expect("plan valid for dataset");
                if pred == y[i] {
                    correct += dataset.weights[i];
                }
            }
            (1.0 - lam) * correct - lam * branches
        }
        ObjectiveMode::WorstCase => {
            let k = dataset.num_classes();
            let mut correct = vec![0usize; k];
            let mut totals = vec![0usize; k];
            for (i, row) in dataset.x.iter().enumerate() {
                totals[y[i]] += 1;
                let pred = plan.predict_row(row).expect("plan valid for dataset");
                if pred == y[i] {
                    correct[y[i]] += 1;
                }
            }
            let worst = (0..k)
                .filter(|&c| totals[c] > 0)
                .map(|c| correct[c] as f64 / totals[c] as f64)
                .fold(f64::INFINITY, f64::min);
            (1.0 - lam) * worst - lam * branches
        }
    }
}

/// Full variable assignment realizing `plan`: roles plus the routed flows.
/// Used to hand the solver a feasible warm start.
pub(crate) fn plan_assignment(
    plan: &TreePlan,
    handles: &ModelHandles,
    x: &[Vec<u8>],
    num_model_vars: usize,
    gamma_value: Option<f64>,
) -> Vec<f64> {
    let topo = handles.topology;
    let mut values = vec![0.0f64; num_model_vars];
    for node in topo.all_nodes() {
        match plan.role(node) {
            NodeRole::Branch(f) => values[handles.b[node - 1][f].index()] = 1.0,
            NodeRole::Predict(k) => {
                values[handles.p[node - 1].index()] = 1.0;
                values[handles.w[node - 1][k].index()] = 1.0;
            }
            NodeRole::Pruned => {}
        }
    }
    for (i, row) in x.iter().enumerate() {
        values[handles.source[i].index()] = 1.0;
        let path = plan.route(row).expect("plan valid for data");
        for pair in path.windows(2) {
            let (l, r) = handles.edge[i][pair[0] - 1];
            let id = if pair[1] % 2 == 0 { l } else { r };
            values[id.index()] = 1.0;
        }
        let terminal = *path.last().unwrap();
        if let NodeRole::Predict(k) = plan.role(terminal) {
            values[handles.sink[i][terminal - 1][k].index()] = 1.0;
        }
    }
    if let (Some(g), Some(v)) = (handles.gamma, gamma_value) {
        values[g.index()] = v;
    }
    values
}

/// Per-class recall minimum of `plan`, used to complete worst-case warm starts.
fn worst_class_recall(plan: &TreePlan, dataset: &BinarizedDataset) -> f64 {
    let y = dataset.y.as_ref().expect("classification dataset");
    let k = dataset.num_classes();
    let mut correct = vec![0usize; k];
    let mut totals = vec![0usize; k];
    for (i, row) in dataset.x.iter().enumerate() {
        totals[y[i]] += 1;
        if plan.predict_row(row).expect("valid") == y[i] {
            correct[y[i]] += 1;
        }
    }
    (0..k)
        .filter(|&c| totals[c] > 0)
        .map(|c| correct[c] as f64 / totals[c] as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Run a built model to optimality and package the fit.
pub(crate) fn run_fit(
    model: &Model,
    handles: &ModelHandles,
    dataset: &BinarizedDataset,
    config: &OCTConfig,
    warm_plan: Option<&TreePlan>,
) -> Result<(TreePlan, SolveResult, bool), FitError> {
    let warm = warm_plan.map(|plan| {
        let gamma = handles
            .gamma
            .map(|_| worst_class_recall(plan, dataset));
        plan_assignment(plan, handles, &dataset.x, model.num_variables(), gamma)
    });
    let solve = solve_mip_warm(model, &config.solver, warm.as_deref())?;
    match solve.status {
        SolveStatus::Infeasible => Err(FitError::Infeasible),
        SolveStatus::Unbounded => Err(FitError::Inconsistent(
            "relaxation reported unbounded".into(),
        )),
        SolveStatus::TimeLimit if !solve.has_solution() => Err(FitError::NoIncumbent),
        status => {
            let plan = extract_plan(handles, &solve, handles.topology)?;
            let limited = matches!(status, SolveStatus::TimeLimit | SolveStatus::GapLimit);
            Ok((plan, solve, limited))
        }
    }
}

/// Fit an optimal classification tree.
pub fn fit_classifier(
    dataset: &BinarizedDataset,
    config: &OCTConfig,
) -> Result<FitResult, FitError> {
    let (model, handles) = build_flow_model(dataset, config)?;
    let warm = greedy_tree(
        &dataset.x,
        dataset.y.as_ref().expect("validated"),
        &dataset.weights,
        dataset.num_classes(),
        config.depth,
    );
    let (plan, mut solve, limited) = run_fit(&model, &handles, dataset, config, Some(&warm))?;
    let objective = evaluate_objective(&plan, dataset, config);
    if !limited && (objective - solve.objective).abs() > 1e-6 * objective.abs().max(1.0) {
        return Err(FitError::Inconsistent(format!(
            "traversal objective {objective} vs solver {}",
            solve.objective
        )));
    }
    // The traversal value is exact; the incumbent's is LP arithmetic.
    solve.objective = objective;
    Ok(FitResult {
        plan,
        objective,
        solve,
        limited,
        solves: 1,
    })
}
