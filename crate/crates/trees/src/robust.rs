//! Classification trees robust to feature perturbations with per-sample flip
//! costs and a budget, solved by an outer cut-generation loop.
//!
//! A sample counts as robustly correct when no flip set the adversary can
//! afford reroutes it to a wrong-label prediction. The master problem keeps
//! only the role variables plus one correctness indicator `t_i` per sample;
//! whenever the incumbent admits a cheap misclassifying perturbation for a
//! sample with `t_i = 1`, separation adds the blocking row
//!
//! ```text
//!   t_i <= sum_{(n,f) in witness path} (1 - b[n,f]) + (1 - w[m,k])
//! ```
//!
//! which any tree containing the witnessed branch decisions and wrong-label
//! terminal violates, and the model is rebuilt and re-solved. Trees that
//! break the witness anywhere satisfy the row slackly, so no optimum is ever
//! cut off. Flips are global per sample: one flip of a feature changes
//! routing at every node that branches on it, enforced by a required-value
//! consistency check along each candidate path.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use optree_mip::{
    solve_mip_warm, ConstraintSense, Model, ObjectiveSense, SolveStatus, VarId,
};

use crate::dataset::{validate, BinarizedDataset, Task};
use crate::error::FitError;
use crate::flow::{extract_plan_parts, FitResult, OCTConfig};
use crate::greedy::greedy_tree;
use crate::tree::{NodeRole, Topology, TreePlan};

/// Per-sample flip costs and the adversary budget.
#[derive(Debug, Clone)]
pub struct RobustSpec {
    /// `costs[i][f]` >= 0: price of flipping feature `f` of sample `i`.
    pub costs: Vec<Vec<f64>>,
    /// Per-sample budget; a perturbation is affordable when its total cost
    /// is at most `epsilon`.
    pub epsilon: f64,
}

impl RobustSpec {
    pub fn uniform(n: usize, f: usize, cost: f64, epsilon: f64) -> RobustSpec {
        RobustSpec {
            costs: vec![vec![cost; f]; n],
            epsilon,
        }
    }

    fn check(&self, dataset: &BinarizedDataset) -> Result<(), FitError> {
        if self.costs.len() != dataset.n() {
            return Err(FitError::Robustness(format!(
                "cost matrix has {} rows, dataset has {}",
                self.costs.len(),
                dataset.n()
            )));
        }
        for (i, row) in self.costs.iter().enumerate() {
            if row.len() != dataset.num_features() {
                return Err(FitError::Robustness(format!(
                    "cost row {i} has {} entries, expected {}",
                    row.len(),
                    dataset.num_features()
                )));
            }
            for &c in row {
                if !c.is_finite() || c < 0.0 {
                    return Err(FitError::Robustness(format!(
                        "cost row {i} contains invalid entry {c}"
                    )));
                }
            }
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(FitError::Robustness(format!(
                "budget must be finite and nonnegative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// A cheapest misclassifying perturbation: the branch decisions along the
/// path to a wrong-label terminal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Witness {
    /// `(node, feature)` for every branch node on the path.
    pub decisions: Vec<(usize, usize)>,
    /// Terminal prediction node.
    pub terminal: usize,
    /// Its (wrong) label.
    pub wrong_label: usize,
}

/// Cheapest cost at which the adversary can push `(x, y)` into a wrong-label
/// prediction of `plan`, with the witness path; `None` when every wrong-label
/// node is unreachable (e.g. a constant plan predicting `y`).
pub fn min_misclassification_cost(
    plan: &TreePlan,
    x: &[u8],
    y: usize,
    costs: &[f64],
) -> Option<(f64, Witness)> {
    let topo = plan.topology();
    let mut best: Option<(f64, Witness)> = None;
    for node in topo.all_nodes() {
        let NodeRole::Predict(label) = plan.role(node) else {
            continue;
        };
        if label == y {
            continue;
        }
        // Required feature values along the root path; conflicting
        // requirements make the terminal unreachable for any single
        // assignment of the features.
        let mut required: BTreeMap<usize, u8> = BTreeMap::new();
        let mut decisions = Vec::new();
        let mut reachable = true;
        let mut cur = node;
        while let Some(parent) = topo.parent(cur) {
            let NodeRole::Branch(f) = plan.role(parent) else {
                reachable = false;
                break;
            };
            let bit = (cur % 2 == 1) as u8;
            match required.get(&f) {
                Some(&prev) if prev != bit => {
                    reachable = false;
                    break;
                }
                _ => {
                    required.insert(f, bit);
                }
            }
            decisions.push((parent, f));
            cur = parent;
        }
        if !reachable {
            continue;
        }
        decisions.reverse();
        let cost: f64 = required
            .iter()
            .filter(|&(&f, &bit)| x[f] != bit)
            .map(|(&f, _)| costs[f])
            .sum();
        let witness = Witness {
            decisions,
            terminal: node,
            wrong_label: label,
        };
        let better = match &best {
            None => true,
            // Ties break toward the lowest terminal node index; node order
            // of iteration already guarantees that under strict comparison.
            Some((b, _)) => cost < *b - 1e-12,
        };
        if better {
            best = Some((cost, witness));
        }
    }
    best
}

/// Weighted count of samples the adversary cannot misclassify within budget.
pub fn worst_case_correct(plan: &TreePlan, dataset: &BinarizedDataset, spec: &RobustSpec) -> f64 {
    let y = dataset.y.as_ref().expect("classification dataset");
    let mut total = 0.0;
    for (i, row) in dataset.x.iter().enumerate() {
        let robust = match min_misclassification_cost(plan, row, y[i], &spec.costs[i]) {
            None => true,
            Some((cost, _)) => cost > spec.epsilon,
        };
        if robust {
            total += dataset.weights[i];
        }
    }
    total
}

struct MasterHandles {
    b: Vec<Vec<VarId>>,
    p: Vec<VarId>,
    w: Vec<Vec<VarId>>,
    t: Vec<VarId>,
}

/// Master problem: role variables, structural rows, correctness indicators,
/// and every cut gathered so far.
fn build_master(
    dataset: &BinarizedDataset,
    config: &OCTConfig,
    cuts: &BTreeSet<(usize, Witness)>,
) -> (Model, MasterHandles) {
    let topo = Topology::new(config.depth);
    let k = dataset.num_classes();
    let num_features = dataset.num_features();
    let n = dataset.n();
    let mut model = Model::new(ObjectiveSense::Maximize);

    let b: Vec<Vec<VarId>> = topo
        .branch_nodes()
        .map(|_| (0..num_features).map(|_| model.add_binary()).collect())
        .collect();
    let p: Vec<VarId> = topo.all_nodes().map(|_| model.add_binary()).collect();
    let w: Vec<Vec<VarId>> = topo
        .all_nodes()
        .map(|_| (0..k).map(|_| model.add_binary()).collect())
        .collect();
    // The cut right-hand sides are integers, so maximization drives each t to
    // 0 or 1 on its own; no need to brand them binary.
    let t: Vec<VarId> = (0..n).map(|_| model.add_continuous(0.0, 1.0)).collect();

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

    for (ci, (i, witness)) in cuts.iter().enumerate() {
        // t_i + sum b[n,f] + w[m,k] <= |decisions| + 1
        let mut terms = vec![(t[*i], 1.0)];
        for &(node, f) in &witness.decisions {
            terms.push((b[node - 1][f], 1.0));
        }
        terms.push((w[witness.terminal - 1][witness.wrong_label], 1.0));
        model.add_constraint(
            terms,
            ConstraintSense::Le,
            witness.decisions.len() as f64 + 1.0,
            format!("cut{ci}_i{i}_m{}_k{}", witness.terminal, witness.wrong_label),
        );
    }

    let lam = config.lambda;
    let mut objective: Vec<(VarId, f64)> = t
        .iter()
        .enumerate()
        .map(|(i, &tv)| (tv, (1.0 - lam) * dataset.weights[i]))
        .collect();
    for row in &b {
        for &bv in row {
            objective.push((bv, -lam));
        }
    }
    model.set_objective(objective);
    (
        model,
        MasterHandles { b, p, w, t },
    )
}

fn master_assignment(
    plan: &TreePlan,
    handles: &MasterHandles,
    dataset: &BinarizedDataset,
    spec: &RobustSpec,
    num_vars: usize,
) -> Vec<f64> {
    let y = dataset.y.as_ref().expect("classification dataset");
    let mut values = vec![0.0f64; num_vars];
    for node in plan.topology().all_nodes() {
        match plan.role(node) {
            NodeRole::Branch(f) => values[handles.b[node - 1][f].index()] = 1.0,
            NodeRole::Predict(k) => {
                values[handles.p[node - 1].index()] = 1.0;
                values[handles.w[node - 1][k].index()] = 1.0;
            }
            NodeRole::Pruned => {}
        }
    }
    for (i, row) in dataset.x.iter().enumerate() {
        let robust = match min_misclassification_cost(plan, row, y[i], &spec.costs[i]) {
            None => true,
            Some((cost, _)) => cost > spec.epsilon,
        };
        if robust {
            values[handles.t[i].index()] = 1.0;
        }
    }
    values
}

/// Fit a perturbation-robust classification tree by cut generation.
/// `max_rounds` caps the number of master rebuilds (default 200 through the
/// public wrapper); hitting the cap returns the best incumbent with
/// `limited = true`.
pub fn fit_robust_capped(
    dataset: &BinarizedDataset,
    config: &OCTConfig,
    spec: &RobustSpec,
    max_rounds: usize,
) -> Result<FitResult, FitError> {
    config.check()?;
    let diags = validate(dataset, Task::Robust);
    if !diags.is_empty() {
        return Err(FitError::InvalidDataset(diags));
    }
    spec.check(dataset)?;

    let y = dataset.y.as_ref().expect("validated");
    let mut cuts: BTreeSet<(usize, Witness)> = BTreeSet::new();
    let mut warm_plan = greedy_tree(
        &dataset.x,
        y,
        &dataset.weights,
        dataset.num_classes(),
        config.depth,
    );
    let mut rounds = 0usize;

    loop {
        rounds += 1;
        let (model, handles) = build_master(dataset, config, &cuts);
        let warm = master_assignment(&warm_plan, &handles, dataset, spec, model.num_variables());
        let solve = solve_mip_warm(&model, &config.solver, Some(&warm))?;
        match solve.status {
            SolveStatus::Infeasible => return Err(FitError::Infeasible),
            SolveStatus::Unbounded => {
                return Err(FitError::Inconsistent("master reported unbounded".into()))
            }
            SolveStatus::TimeLimit if !solve.has_solution() => return Err(FitError::NoIncumbent),
            _ => {}
        }
        let plan = extract_plan_parts(
            &handles.b,
            &handles.p,
            &handles.w,
            &solve.values,
            Topology::new(config.depth),
        )?;

        // Separation: any sample claimed robust but attackable within budget
        // yields a new blocking row.
        let mut violated = Vec::new();
        for (i, row) in dataset.x.iter().enumerate() {
            if solve.values[handles.t[i].index()] < 0.5 {
                continue;
            }
            if let Some((cost, witness)) = min_misclassification_cost(&plan, row, y[i], &spec.costs[i]) {
                if cost <= spec.epsilon {
                    violated.push((i, witness));
                }
            }
        }

        if violated.is_empty() {
            let objective = (1.0 - config.lambda) * worst_case_correct(&plan, dataset, spec)
                - config.lambda * plan.branch_count() as f64;
            let limited = matches!(solve.status, SolveStatus::TimeLimit | SolveStatus::GapLimit);
            if !limited && (objective - solve.objective).abs() > 1e-6 * objective.abs().max(1.0) {
                return Err(FitError::Inconsistent(format!(
                    "robust evaluator {objective} vs master {}",
                    solve.objective
                )));
            }
            let mut solve = solve;
            solve.objective = objective;
            return Ok(FitResult {
                plan,
                objective,
                solve,
                limited,
                solves: rounds,
            });
        }

        if rounds >= max_rounds {
            // Cap hit: report the incumbent honestly as a limited result.
            let objective = (1.0 - config.lambda) * worst_case_correct(&plan, dataset, spec)
                - config.lambda * plan.branch_count() as f64;
            let mut solve = solve;
            solve.objective = objective;
            return Ok(FitResult {
                plan,
                objective,
                solve,
                limited: true,
                solves: rounds,
            });
        }

        for cut in violated {
            let fresh = cuts.insert(cut);
            if !fresh {
                // A correctly separated witness can never repeat: its row
                // would already have forced t to zero.
                return Err(FitError::Robustness(
                    "separation produced a duplicate cut".into(),
                ));
            }
        }
        warm_plan = plan;
    }
}

/// [`fit_robust_capped`] with the default cap of 200 rounds.
pub fn fit_robust(
    dataset: &BinarizedDataset,
    config: &OCTConfig,
    spec: &RobustSpec,
) -> Result<FitResult, FitError> {
    fit_robust_capped(dataset, config, spec, 200)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::fit_classifier;

    fn xor_dataset() -> BinarizedDataset {
        BinarizedDataset::classification(
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
            vec![0, 1, 1, 0],
        )
    }

    #[test]
    fn misclassified_point_costs_nothing_to_attack() {
        let plan = TreePlan::constant(1, 1);
        let got = min_misclassification_cost(&plan, &[0], 0, &[5.0]);
        let (cost, witness) = got.expect("wrong-label node exists");
        assert_eq!(cost, 0.0);
        assert_eq!(witness.terminal, 1);
        assert_eq!(witness.wrong_label, 1);
    }

    #[test]
    fn constant_correct_plan_cannot_be_attacked() {
        let plan = TreePlan::constant(1, 0);
        assert!(min_misclassification_cost(&plan, &[0], 0, &[5.0]).is_none());
    }

    #[test]
    fn depth1_attack_pays_the_flip() {
        let plan = TreePlan::new(
            1,
            vec![
                NodeRole::Branch(0),
                NodeRole::Predict(0),
                NodeRole::Predict(1),
            ],
        )
        .unwrap();
        let (cost, witness) = min_misclassification_cost(&plan, &[0], 0, &[3.0]).unwrap();
        assert_eq!(cost, 3.0);
        assert_eq!(witness.terminal, 3);
        assert_eq!(witness.decisions, vec![(1, 0)]);
    }

    #[test]
    fn conflicting_requirements_make_nodes_unreachable() {
        // Same feature on both levels: right child of right subtree needs
        // f0=1 twice (fine), left child of right subtree needs f0=1 then 0
        // (contradiction).
        let plan = TreePlan::new(
            2,
            vec![
                NodeRole::Branch(0),
                NodeRole::Predict(0),
                NodeRole::Branch(0),
                NodeRole::Pruned,
                NodeRole::Pruned,
                NodeRole::Predict(1),
                NodeRole::Predict(0),
            ],
        )
        .unwrap();
        // Sample (1,), label 1: wrong nodes are 2 (label 0, needs f0=0) and
        // 7 (label 0, needs f0=1 and f0=1 again).
        let (cost, witness) = min_misclassification_cost(&plan, &[1], 1, &[2.0]).unwrap();
        // Node 7 requires no flips at all (f0 already 1).
        assert_eq!(cost, 0.0);
        assert_eq!(witness.terminal, 7);
        // Node 6 (label 1) is not a wrong node; node 2 costs a flip of 2.
        let _ = cost;
    }

    #[test]
    fn mismatched_cost_dimensions_are_rejected() {
        let ds = xor_dataset();
        let cfg = OCTConfig::new(1, 0.0);
        let wrong_rows = RobustSpec::uniform(3, 2, 1.0, 0.0);
        assert!(matches!(
            fit_robust(&ds, &cfg, &wrong_rows),
            Err(FitError::Robustness(_))
        ));
        let wrong_cols = RobustSpec::uniform(4, 5, 1.0, 0.0);
        assert!(matches!(
            fit_robust(&ds, &cfg, &wrong_cols),
            Err(FitError::Robustness(_))
        ));
        let negative_eps = RobustSpec::uniform(4, 2, 1.0, -1.0);
        assert!(matches!(
            fit_robust(&ds, &cfg, &negative_eps),
            Err(FitError::Robustness(_))
        ));
    }

    #[test]
    fn zero_budget_equals_nominal_fit() {
        let ds = xor_dataset();
        let spec = RobustSpec::uniform(4, 2, 1.0, 0.0);
        let cfg = OCTConfig::new(2, 0.0);
        let robust = fit_robust(&ds, &cfg, &spec).unwrap();
        let nominal = fit_classifier(&ds, &cfg).unwrap();
        assert_eq!(robust.objective, nominal.objective);
        assert!(!robust.limited);
    }

    #[test]
    fn unlimited_adversary_forces_majority_constant() {
        let ds = BinarizedDataset::classification(
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1], vec![1, 1]],
            vec![0, 0, 0, 1, 1],
        );
        let spec = RobustSpec::uniform(5, 2, 1.0, 10.0);
        let cfg = OCTConfig::new(2, 0.0);
        let fit = fit_robust(&ds, &cfg, &spec).unwrap();
        // Majority class 0 has three samples.
        assert_eq!(fit.objective, 3.0);
        assert_eq!(
            worst_case_correct(&fit.plan, &ds, &spec),
            3.0
        );
    }

    #[test]
    fn evaluator_agrees_with_final_master() {
        let ds = xor_dataset();
        let spec = RobustSpec::uniform(4, 2, 1.0, 1.0);
        let cfg = OCTConfig::new(2, 0.0);
        let fit = fit_robust(&ds, &cfg, &spec).unwrap();
        assert_eq!(fit.objective, worst_case_correct(&fit.plan, &ds, &spec));
        assert!(fit.solves >= 1);
    }

    #[test]
    fn worst_case_count_with_zero_budget_is_nominal_accuracy() {
        let ds = xor_dataset();
        let plan = crate::tree::tests::xor_plan();
        let spec = RobustSpec::uniform(4, 2, 1.0, 0.0);
        assert_eq!(worst_case_correct(&plan, &ds, &spec), 4.0);
    }

    #[test]
    fn constant_plan_protects_its_class_only() {
        let ds = xor_dataset();
        let plan = TreePlan::constant(2, 0);
        for eps in [0.0, 1.0, 100.0] {
            let spec = RobustSpec::uniform(4, 2, 1.0, eps);
            assert_eq!(worst_case_correct(&plan, &ds, &spec), 2.0);
        }
    }
}
