//! Fairness-constrained classification trees: statistical parity,
//! conditional statistical parity, and equalized odds as linear side
//! constraints on the flow model.
//!
//! Because every sample routes exactly one unit of flow to a sink, the sink
//! total over nodes for the positive class is an exact predicted-positive
//! indicator, so group rates are linear expressions and each unordered group
//! pair needs just two rows per stratum (one per direction of the absolute
//! difference). Fairness is measured in-sample, inside the optimization;
//! out-of-sample auditing goes through [`disparity`].

use std::fmt;

use optree_mip::{ConstraintSense, Model, VarId};

use crate::dataset::{validate, BinarizedDataset, Task};
use crate::error::FitError;
use crate::flow::{build_flow_model, evaluate_objective, run_fit, FitResult, ModelHandles, OCTConfig};
use crate::greedy::greedy_tree;
use crate::tree::TreePlan;

/// Which disparity notion to bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FairnessKind {
    /// Equal positive-prediction rates across protected groups.
    StatisticalParity,
    /// Statistical parity within every legitimate-factor value.
    ConditionalStatisticalParity,
    /// Statistical parity within every true-label stratum.
    EqualizedOdds,
}

impl FairnessKind {
    pub fn parse(s: &str) -> Result<FairnessKind, FitError> {
        match s.to_ascii_uppercase().as_str() {
            "SP" => Ok(FairnessKind::StatisticalParity),
            "CSP" => Ok(FairnessKind::ConditionalStatisticalParity),
            "EQODDS" | "EQ_ODDS" | "EQUALIZEDODDS" => Ok(FairnessKind::EqualizedOdds),
            other => Err(FitError::Fairness(format!(
                "unknown fairness type '{other}' (expected SP, CSP or EqOdds)"
            ))),
        }
    }
}

impl fmt::Display for FairnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FairnessKind::StatisticalParity => "SP",
            FairnessKind::ConditionalStatisticalParity => "CSP",
            FairnessKind::EqualizedOdds => "EqOdds",
        };
        f.write_str(s)
    }
}

/// Fairness side-constraint description.
#[derive(Debug, Clone)]
pub struct FairnessSpec {
    pub kind: FairnessKind,
    /// Allowed rate gap in `[0, 1]`.
    pub bound: f64,
    /// Label treated as the positive prediction.
    pub positive_class: usize,
}

impl FairnessSpec {
    pub fn new(kind: FairnessKind, bound: f64, positive_class: usize) -> FairnessSpec {
        FairnessSpec {
            kind,
            bound,
            positive_class,
        }
    }

    fn check(&self, dataset: &BinarizedDataset) -> Result<(), FitError> {
        if !(0.0..=1.0).contains(&self.bound) {
            return Err(FitError::Fairness(format!(
                "fairness bound must lie in [0, 1], got {}",
                self.bound
            )));
        }
        if self.positive_class >= dataset.num_classes() {
            return Err(FitError::Fairness(format!(
                "positive class {} out of range for {} classes",
                self.positive_class,
                dataset.num_classes()
            )));
        }
        if self.kind == FairnessKind::ConditionalStatisticalParity && dataset.legitimate.is_none()
        {
            return Err(FitError::Fairness(
                "conditional statistical parity needs a legitimate factor column".into(),
            ));
        }
        Ok(())
    }
}

/// Strata over which group rates are compared: one `None` stratum for plain
/// statistical parity, legitimate-factor values for the conditional variant,
/// true labels for equalized odds. Each member set is the sample-index list.
fn strata(dataset: &BinarizedDataset, kind: FairnessKind) -> Vec<(String, Vec<usize>)> {
    let n = dataset.n();
    match kind {
        FairnessKind::StatisticalParity => vec![("all".to_string(), (0..n).collect())],
        FairnessKind::ConditionalStatisticalParity => {
            let legit = dataset.legitimate.as_ref().expect("checked");
            let values = dataset.legitimate_names.len().max(
                legit.iter().copied().max().map(|m| m + 1).unwrap_or(0),
            );
            (0..values)
                .map(|v| {
                    (
                        format!("legit{v}"),
                        (0..n).filter(|&i| legit[i] == v).collect(),
                    )
                })
                .collect()
        }
        FairnessKind::EqualizedOdds => {
            let y = dataset.y.as_ref().expect("classification data");
            let k = dataset.num_classes();
            (0..k)
                .map(|c| (format!("y{c}"), (0..n).filter(|&i| y[i] == c).collect()))
                .collect()
        }
    }
}

/// Add the two-sided rate-gap rows for every applicable group pair and
/// stratum; returns the number of rows added. Strata where either group is
/// empty are skipped, matching [`disparity`].
pub fn add_fairness_constraints(
    model: &mut Model,
    handles: &ModelHandles,
    spec: &FairnessSpec,
    dataset: &BinarizedDataset,
) -> Result<usize, FitError> {
    spec.check(dataset)?;
    let groups = dataset
        .protected
        .as_ref()
        .ok_or_else(|| FitError::Fairness("protected attribute missing".into()))?;
    let g = dataset
        .protected_names
        .len()
        .max(groups.iter().copied().max().map(|m| m + 1).unwrap_or(0));
    if g < 2 {
        return Ok(0);
    }

    let mut rows = 0usize;
    let pos = spec.positive_class;
    for (stratum_name, members) in strata(dataset, spec.kind) {
        for a in 0..g {
            for b in (a + 1)..g {
                let ga: Vec<usize> = members.iter().copied().filter(|&i| groups[i] == a).collect();
                let gb: Vec<usize> = members.iter().copied().filter(|&i| groups[i] == b).collect();
                if ga.is_empty() || gb.is_empty() {
                    continue;
                }
                let rate = |set: &[usize], sign: f64| -> Vec<(VarId, f64)> {
                    let share = sign / set.len() as f64;
                    let mut terms = Vec::new();
                    for &i in set {
                        for node in handles.topology.all_nodes() {
                            terms.push((handles.sink[i][node - 1][pos], share));
                        }
                    }
                    terms
                };
                let mut fwd = rate(&ga, 1.0);
                fwd.extend(rate(&gb, -1.0));
                model.add_constraint(
                    fwd,
                    ConstraintSense::Le,
                    spec.bound,
                    format!("fair_{stratum_name}_g{a}_g{b}"),
                );
                let mut rev = rate(&gb, 1.0);
                rev.extend(rate(&ga, -1.0));
                model.add_constraint(
                    rev,
                    ConstraintSense::Le,
                    spec.bound,
                    format!("fair_{stratum_name}_g{b}_g{a}"),
                );
                rows += 2;
            }
        }
    }
    Ok(rows)
}

/// Fit a fairness-constrained classification tree.
pub fn fit_fair(
    dataset: &BinarizedDataset,
    config: &OCTConfig,
    spec: &FairnessSpec,
) -> Result<FitResult, FitError> {
    let diags = validate(dataset, Task::Fair);
    if !diags.is_empty() {
        return Err(FitError::InvalidDataset(diags));
    }
    let (mut model, handles) = build_flow_model(dataset, config)?;
    add_fairness_constraints(&mut model, &handles, spec, dataset)?;
    // The greedy seed may violate the fairness rows; the solver checks and
    // silently drops it in that case.
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
    solve.objective = objective;
    Ok(FitResult {
        plan,
        objective,
        solve,
        limited,
        solves: 1,
    })
}

/// Largest absolute positive-rate gap of `plan` over all applicable group
/// pairs and strata, computed by pure traversal. Strata missing one of the
/// two groups are skipped, exactly as in constraint generation.
pub fn disparity(
    plan: &TreePlan,
    dataset: &BinarizedDataset,
    spec: &FairnessSpec,
) -> Result<f64, FitError> {
    spec.check(dataset)?;
    let groups = dataset
        .protected
        .as_ref()
        .ok_or_else(|| FitError::Fairness("protected attribute missing".into()))?;
    let g = dataset
        .protected_names
        .len()
        .max(groups.iter().copied().max().map(|m| m + 1).unwrap_or(0));
    let preds = plan.predict(&dataset.x)?;
    let pos = spec.positive_class;

    let mut worst = 0.0f64;
    for (_, members) in strata(dataset, spec.kind) {
        for a in 0..g {
            for b in (a + 1)..g {
                let rate_of = |grp: usize| -> Option<f64> {
                    let set: Vec<usize> = members
                        .iter()
                        .copied()
                        .filter(|&i| groups[i] == grp)
                        .collect();
                    if set.is_empty() {
                        return None;
                    }
                    let hits = set.iter().filter(|&&i| preds[i] == pos).count();
                    Some(hits as f64 / set.len() as f64)
                };
                if let (Some(ra), Some(rb)) = (rate_of(a), rate_of(b)) {
                    worst = worst.max((ra - rb).abs());
                }
            }
        }
    }
    Ok(worst)
}
