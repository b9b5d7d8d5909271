//! Treatment-assignment trees from observational data.
//!
//! The pipeline estimates a counterfactual score `v[i][k]` — the predicted
//! outcome of sample `i` under treatment `k` — by inverse-propensity
//! weighting, the direct method, or their doubly robust combination, then
//! reuses the flow model with treatments in place of class labels and
//! maximizes the estimated policy value, optionally under hard per-treatment
//! capacity budgets. Nuisances come from exact feature-vector strata with
//! Laplace smoothing; callers with their own estimators can hand a
//! [`ScoreMatrix`] straight to [`fit_policy`].

use std::collections::BTreeMap;

use optree_mip::{ConstraintSense, VarId};

use crate::dataset::{validate, BinarizedDataset, Task};
use crate::error::FitError;
use crate::flow::{build_flow_core, run_fit, FitResult, OCTConfig};
use crate::tree::TreePlan;

/// Counterfactual score estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMethod {
    /// Inverse-propensity weighting: `1[t_i = k] * y_i / e(k | s_i)`.
    Ipw,
    /// Direct method: the stratum-conditional outcome mean.
    Dm,
    /// Doubly robust: direct method plus the IPW-corrected residual.
    Dr,
}

impl ScoreMethod {
    pub fn parse(s: &str) -> Result<ScoreMethod, FitError> {
        match s.to_ascii_lowercase().as_str() {
            "ipw" => Ok(ScoreMethod::Ipw),
            "dm" => Ok(ScoreMethod::Dm),
            "dr" => Ok(ScoreMethod::Dr),
            other => Err(FitError::Scores(format!(
                "unknown score method '{other}' (expected ipw, dm or dr)"
            ))),
        }
    }
}

/// Propensities and outcome means per exact-feature-vector stratum.
#[derive(Debug, Clone)]
pub struct NuisanceEstimates {
    /// Stratum index of every sample.
    pub stratum_of: Vec<usize>,
    /// `propensity[s][k]` > 0, rows summing to one.
    pub propensity: Vec<Vec<f64>>,
    /// `outcome_mean[s][k]` with arm-mean then global-mean fallbacks.
    pub outcome_mean: Vec<Vec<f64>>,
    pub alpha: f64,
}

/// Estimate propensities and outcome means on exact binarized strata with
/// Laplace smoothing `alpha`.
pub fn estimate_nuisances(
    data: &BinarizedDataset,
    alpha: f64,
) -> Result<NuisanceEstimates, FitError> {
    let diags = validate(data, Task::Policy);
    if !diags.is_empty() {
        return Err(FitError::InvalidDataset(diags));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(FitError::Scores(format!("bad smoothing alpha {alpha}")));
    }
    let t = data.treatment.as_ref().expect("validated");
    let y = data.outcome.as_ref().expect("validated");
    let k = data.num_treatments();
    let n = data.n();

    let mut stratum_ids: BTreeMap<&[u8], usize> = BTreeMap::new();
    let mut stratum_of = Vec::with_capacity(n);
    for row in &data.x {
        let next = stratum_ids.len();
        let id = *stratum_ids.entry(row.as_slice()).or_insert(next);
        stratum_of.push(id);
    }
    let s_count = stratum_ids.len();

    let mut cell_count = vec![vec![0usize; k]; s_count];
    let mut cell_sum = vec![vec![0.0f64; k]; s_count];
    let mut stratum_count = vec![0usize; s_count];
    let mut arm_count = vec![0usize; k];
    let mut arm_sum = vec![0.0f64; k];
    let mut global_sum = 0.0;
    for i in 0..n {
        let s = stratum_of[i];
        cell_count[s][t[i]] += 1;
        cell_sum[s][t[i]] += y[i];
        stratum_count[s] += 1;
        arm_count[t[i]] += 1;
        arm_sum[t[i]] += y[i];
        global_sum += y[i];
    }
    let global_mean = global_sum / n as f64;

    if alpha == 0.0 {
        for (s, counts) in cell_count.iter().enumerate() {
            for (arm, &c) in counts.iter().enumerate() {
                if c == 0 {
                    return Err(FitError::DivisionHazard(format!(
                        "stratum {s} has no samples under treatment {arm}"
                    )));
                }
            }
        }
    }

    let mut propensity = vec![vec![0.0f64; k]; s_count];
    let mut outcome_mean = vec![vec![0.0f64; k]; s_count];
    for s in 0..s_count {
        for arm in 0..k {
            propensity[s][arm] = (cell_count[s][arm] as f64 + alpha)
                / (stratum_count[s] as f64 + alpha * k as f64);
            outcome_mean[s][arm] = if cell_count[s][arm] > 0 {
                cell_sum[s][arm] / cell_count[s][arm] as f64
            } else if arm_count[arm] > 0 {
                arm_sum[arm] / arm_count[arm] as f64
            } else {
                global_mean
            };
        }
    }

    Ok(NuisanceEstimates {
        stratum_of,
        propensity,
        outcome_mean,
        alpha,
    })
}

/// Estimated outcome of every sample under every treatment.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    /// `v[i][k]`, n rows, one column per treatment.
    pub v: Vec<Vec<f64>>,
    pub method: ScoreMethod,
}

impl ScoreMatrix {
    pub fn from_values(v: Vec<Vec<f64>>, method: ScoreMethod) -> ScoreMatrix {
        ScoreMatrix { v, method }
    }

    fn check(&self, n: usize, k: usize) -> Result<(), FitError> {
        if self.v.len() != n {
            return Err(FitError::Scores(format!(
                "score matrix has {} rows, expected {n}",
                self.v.len()
            )));
        }
        for (i, row) in self.v.iter().enumerate() {
            if row.len() != k {
                return Err(FitError::Scores(format!(
                    "score row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            for &s in row {
                if !s.is_finite() {
                    return Err(FitError::Scores(format!("score row {i} is not finite")));
                }
            }
        }
        Ok(())
    }
}

/// Counterfactual scores from nuisance estimates.
pub fn compute_scores(
    data: &BinarizedDataset,
    nuisances: &NuisanceEstimates,
    method: ScoreMethod,
) -> ScoreMatrix {
    let t = data.treatment.as_ref().expect("policy dataset");
    let y = data.outcome.as_ref().expect("policy dataset");
    let k = data.num_treatments();
    let v = (0..data.n())
        .map(|i| {
            let s = nuisances.stratum_of[i];
            (0..k)
                .map(|arm| {
                    let e = nuisances.propensity[s][arm];
                    let mu = nuisances.outcome_mean[s][arm];
                    let observed = t[i] == arm;
                    match method {
                        ScoreMethod::Ipw => {
                            if observed {
                                y[i] / e
                            } else {
                                0.0
                            }
                        }
                        ScoreMethod::Dm => mu,
                        ScoreMethod::Dr => {
                            if observed {
                                mu + (y[i] - mu) / e
                            } else {
                                mu
                            }
                        }
                    }
                })
                .collect()
        })
        .collect();
    ScoreMatrix { v, method }
}

/// Configuration for policy fits: tree shape plus optional per-treatment
/// capacity budgets (`None` = unlimited).
#[derive(Debug, Clone)]
pub struct PolicyConfig {
    pub depth: u32,
    pub lambda: f64,
    pub budgets: Vec<Option<u64>>,
    pub solver: optree_mip::SolverConfig,
}

impl PolicyConfig {
    pub fn new(depth: u32, lambda: f64, num_treatments: usize) -> PolicyConfig {
        let solver = optree_mip::SolverConfig {
            branch_rule: optree_mip::BranchRule::LowestIndex,
            ..optree_mip::SolverConfig::default()
        };
        PolicyConfig {
            depth,
            lambda,
            budgets: vec![None; num_treatments],
            solver,
        }
    }

    pub fn with_budget(mut self, treatment: usize, capacity: u64) -> PolicyConfig {
        self.budgets[treatment] = Some(capacity);
        self
    }

    fn as_oct(&self) -> OCTConfig {
        OCTConfig {
            depth: self.depth,
            lambda: self.lambda,
            objective: crate::flow::ObjectiveMode::Accuracy,
            solver: self.solver.clone(),
        }
    }
}

/// Build the policy flow model: the shared routing structure with the score
/// objective and any finite-budget capacity rows.
pub fn build_policy_model(
    data: &BinarizedDataset,
    scores: &ScoreMatrix,
    config: &PolicyConfig,
) -> Result<(optree_mip::Model, crate::flow::ModelHandles), FitError> {
    let diags = validate(data, Task::Policy);
    if !diags.is_empty() {
        return Err(FitError::InvalidDataset(diags));
    }
    let k = data.num_treatments();
    scores.check(data.n(), k)?;
    if config.budgets.len() != k {
        return Err(FitError::Scores(format!(
            "{} budgets for {k} treatments",
            config.budgets.len()
        )));
    }
    config.as_oct().check()?;

    let (mut model, handles) = build_flow_core(&data.x, k, config.depth);
    let lam = config.lambda;
    let mut objective: Vec<(VarId, f64)> = Vec::new();
    for i in 0..data.n() {
        for node in handles.topology.all_nodes() {
            for (arm, &sv) in handles.sink[i][node - 1].iter().enumerate() {
                let c = (1.0 - lam) * scores.v[i][arm];
                if c != 0.0 {
                    objective.push((sv, c));
                }
            }
        }
    }
    for row in &handles.b {
        for &bv in row {
            objective.push((bv, -lam));
        }
    }
    model.set_objective(objective);

    for (arm, budget) in config.budgets.iter().enumerate() {
        let Some(cap) = budget else { continue };
        let mut terms = Vec::new();
        for i in 0..data.n() {
            for node in handles.topology.all_nodes() {
                terms.push((handles.sink[i][node - 1][arm], 1.0));
            }
        }
        model.add_constraint(terms, ConstraintSense::Le, *cap as f64, format!("budget_k{arm}"));
    }
    Ok((model, handles))
}

/// Fit a treatment-assignment tree maximizing estimated policy value.
pub fn fit_policy(
    data: &BinarizedDataset,
    scores: &ScoreMatrix,
    config: &PolicyConfig,
) -> Result<FitResult, FitError> {
    let (model, handles) = build_policy_model(data, scores, config)?;
    let k = data.num_treatments();
    let oct = config.as_oct();
    let lam = config.lambda;

    // Seed with the best constant assignment; rejected automatically when a
    // budget makes it infeasible.
    let best_arm = (0..k)
        .max_by(|&a, &b| {
            let va: f64 = scores.v.iter().map(|r| r[a]).sum();
            let vb: f64 = scores.v.iter().map(|r| r[b]).sum();
            va.partial_cmp(&vb).expect("finite scores").then(b.cmp(&a))
        })
        .unwrap_or(0);
    let warm = TreePlan::constant(config.depth, best_arm);
    let (plan, mut solve, limited) = run_fit(&model, &handles, data, &oct, Some(&warm))?;

    let objective = (1.0 - lam) * policy_value(&plan, &data.x, scores)? - lam * plan.branch_count() as f64;
    if !limited && (objective - solve.objective).abs() > 1e-6 * objective.abs().max(1.0) {
        return Err(FitError::Inconsistent(format!(
            "policy evaluator {objective} vs solver {}",
            solve.objective
        )));
    }
    solve.objective = objective;
    Ok(FitResult {
        plan,
        objective,
        solve,
        limited,
        solves: 1,
    })
}

/// Estimated value of following `plan`: the score of the assigned treatment,
/// summed over samples. Pure traversal.
pub fn policy_value(
    plan: &TreePlan,
    x: &[Vec<u8>],
    scores: &ScoreMatrix,
) -> Result<f64, FitError> {
    let mut total = 0.0;
    for (i, row) in x.iter().enumerate() {
        let arm = plan.predict_row(row)?;
        let row_scores = &scores.v[i];
        if arm >= row_scores.len() {
            return Err(FitError::Scores(format!(
                "plan assigns treatment {arm} but scores have {} columns",
                row_scores.len()
            )));
        }
        total += row_scores[arm];
    }
    Ok(total)
}

/// Per-treatment assignment counts of `plan` on `x`.
pub fn assignment_counts(plan: &TreePlan, x: &[Vec<u8>], k: usize) -> Result<Vec<usize>, FitError> {
    let mut counts = vec![0usize; k];
    for row in x {
        let arm = plan.predict_row(row)?;
        if arm >= k {
            return Err(FitError::Scores(format!(
                "plan assigns treatment {arm}, only {k} exist"
            )));
        }
        counts[arm] += 1;
    }
    Ok(counts)
}
