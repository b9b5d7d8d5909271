//! Fit pipelines against the exhaustive plan oracle on small instances, plus
//! the structural properties the formulation promises (flow integrality,
//! monotonicity, invariance under feature duplication, affine score shifts).

use optree::dataset::BinarizedDataset;
use optree::fairness::{disparity, fit_fair, FairnessKind, FairnessSpec};
use optree::flow::{build_flow_model, evaluate_objective, fit_classifier, OCTConfig};
use optree::oracle::best_plan;
use optree::policy::{fit_policy, policy_value, PolicyConfig, ScoreMatrix, ScoreMethod};
use optree::robust::{fit_robust, worst_case_correct, RobustSpec};
use optree_testkit::data::{random_classification, random_fair, random_costs, random_scores};

fn dataset_from(seed: u64, n: usize, f: usize, k: usize) -> BinarizedDataset {
    let inst = random_classification(seed, n, f, k);
    BinarizedDataset::classification(inst.x, inst.y)
}

#[test]
fn classification_fit_matches_oracle() {
    for (seed, depth, lambda) in [
        (1u64, 1u32, 0.0),
        (2, 1, 0.01),
        (3, 2, 0.0),
        (4, 2, 0.01),
        (5, 2, 0.0),
        (6, 2, 0.01),
    ] {
        let ds = dataset_from(seed, 10 + (seed as usize % 5), 3, 2 + (seed as usize % 2));
        let cfg = OCTConfig::new(depth, lambda);
        let fit = fit_classifier(&ds, &cfg).expect("fit");
        let (_, best) = best_plan(depth, ds.num_features(), ds.num_classes(), |plan| {
            Some(evaluate_objective(plan, &ds, &cfg))
        })
        .expect("oracle");
        assert_eq!(
            fit.objective, best,
            "seed {seed} depth {depth} lambda {lambda}"
        );
    }
}

#[test]
fn optimal_accuracy_is_monotone_in_depth() {
    for seed in [11u64, 12, 13] {
        let ds = dataset_from(seed, 12, 3, 2);
        let v1 = fit_classifier(&ds, &OCTConfig::new(1, 0.0)).unwrap().objective;
        let v2 = fit_classifier(&ds, &OCTConfig::new(2, 0.0)).unwrap().objective;
        assert!(v2 >= v1, "seed {seed}: depth 2 {v2} < depth 1 {v1}");
    }
}

#[test]
fn duplicating_features_leaves_the_optimum_unchanged() {
    let ds = dataset_from(21, 10, 3, 2);
    let mut doubled = ds.clone();
    for (row_d, row) in doubled.x.iter_mut().zip(&ds.x) {
        row_d.extend(row.iter().copied());
    }
    doubled.feature_names = (0..doubled.x[0].len()).map(|j| format!("f{j}")).collect();
    let cfg = OCTConfig::new(2, 0.0);
    let a = fit_classifier(&ds, &cfg).unwrap().objective;
    let b = fit_classifier(&doubled, &cfg).unwrap().objective;
    assert_eq!(a, b);
}

#[test]
fn integral_incumbents_route_unit_flows() {
    let ds = dataset_from(31, 9, 3, 2);
    let cfg = OCTConfig::new(2, 0.0);
    let (model, handles) = build_flow_model(&ds, &cfg).expect("build");
    let solve = optree_mip::solve_mip(&model, &cfg.solver).expect("solve");
    assert_eq!(solve.status, optree_mip::SolveStatus::Optimal);
    let tol = 1e-6;
    for i in 0..ds.n() {
        let mut sinks = 0.0;
        for node in handles.topology.all_nodes() {
            for k in 0..handles.num_classes {
                let v = solve.values[handles.sink[i][node - 1][k].index()];
                assert!(v < tol || (v - 1.0).abs() < tol, "fractional sink {v}");
                sinks += v;
            }
        }
        assert!((sinks - 1.0).abs() < 1e-5, "sample {i} sank {sinks}");
        for node in handles.topology.branch_nodes() {
            let (l, r) = handles.edge[i][node - 1];
            for v in [solve.values[l.index()], solve.values[r.index()]] {
                assert!(v < tol || (v - 1.0).abs() < tol, "fractional edge {v}");
            }
        }
    }
}

#[test]
fn fair_fit_matches_filtered_oracle() {
    for (seed, bound) in [(41u64, 0.0), (42, 0.35), (43, 0.7), (44, 1.0)] {
        let inst = random_fair(seed, 10, 3, 2, 2, 2);
        let ds = BinarizedDataset::classification(inst.base.x, inst.base.y)
            .with_protected(inst.group)
            .with_legitimate(inst.legit);
        let cfg = OCTConfig::new(2, 0.0);
        for kind in [
            FairnessKind::StatisticalParity,
            FairnessKind::ConditionalStatisticalParity,
            FairnessKind::EqualizedOdds,
        ] {
            let spec = FairnessSpec::new(kind, bound, 1);
            let fit = fit_fair(&ds, &cfg, &spec).expect("fair fit");
            let got_disparity = disparity(&fit.plan, &ds, &spec).expect("disparity");
            assert!(
                got_disparity <= bound + 1e-6,
                "seed {seed} kind {kind}: disparity {got_disparity} > {bound}"
            );
            let (_, best) = best_plan(2, ds.num_features(), ds.num_classes(), |plan| {
                let d = disparity(plan, &ds, &spec).ok()?;
                (d <= bound + 1e-9).then(|| evaluate_objective(plan, &ds, &cfg))
            })
            .expect("oracle");
            assert_eq!(fit.objective, best, "seed {seed} kind {kind} bound {bound}");
        }
    }
}

#[test]
fn fairness_optimum_is_monotone_in_the_bound() {
    let inst = random_fair(51, 10, 3, 2, 2, 2);
    let ds = BinarizedDataset::classification(inst.base.x, inst.base.y)
        .with_protected(inst.group);
    let cfg = OCTConfig::new(2, 0.0);
    let mut last = f64::NEG_INFINITY;
    for bound in [0.0, 0.35, 0.7, 1.0] {
        let spec = FairnessSpec::new(FairnessKind::StatisticalParity, bound, 1);
        let fit = fit_fair(&ds, &cfg, &spec).expect("fit");
        assert!(
            fit.objective >= last - 1e-12,
            "objective dropped at bound {bound}"
        );
        last = fit.objective;
    }
}

#[test]
fn robust_fit_matches_exhaustive_adversarial_oracle() {
    for (seed, eps) in [(61u64, 0.0), (62, 1.0), (63, 2.0)] {
        let inst = random_classification(seed, 9, 3, 2);
        let ds = BinarizedDataset::classification(inst.x, inst.y);
        let spec = RobustSpec {
            costs: random_costs(seed, 9, 3),
            epsilon: eps,
        };
        let cfg = OCTConfig::new(2, 0.0);
        let fit = fit_robust(&ds, &cfg, &spec).expect("robust fit");
        assert!(!fit.limited, "seed {seed}: cut loop hit its cap");
        let (_, best) = best_plan(2, 3, 2, |plan| {
            Some(worst_case_correct(plan, &ds, &spec))
        })
        .expect("oracle");
        assert_eq!(fit.objective, best, "seed {seed} eps {eps}");
        assert_eq!(fit.objective, worst_case_correct(&fit.plan, &ds, &spec));
    }
}

#[test]
fn robust_objective_is_monotone_in_budget_and_costs() {
    let inst = random_classification(71, 9, 3, 2);
    let ds = BinarizedDataset::classification(inst.x, inst.y);
    let cfg = OCTConfig::new(2, 0.0);
    let mut last = f64::INFINITY;
    for eps in [0.0, 1.0, 2.0, 10.0] {
        let spec = RobustSpec::uniform(9, 3, 1.0, eps);
        let fit = fit_robust(&ds, &cfg, &spec).expect("fit");
        assert!(fit.objective <= last + 1e-12, "objective rose with budget");
        last = fit.objective;
    }
    // Raising every cost can only help.
    let cheap = RobustSpec::uniform(9, 3, 1.0, 1.0);
    let dear = RobustSpec::uniform(9, 3, 2.0, 1.0);
    let a = fit_robust(&ds, &cfg, &cheap).unwrap().objective;
    let b = fit_robust(&ds, &cfg, &dear).unwrap().objective;
    assert!(b >= a - 1e-12);
}

#[test]
fn policy_fit_matches_budget_filtered_oracle() {
    for (seed, with_budget) in [(81u64, false), (82, true), (83, false), (84, true)] {
        let n = 10;
        let k = 2;
        let inst = random_classification(seed, n, 3, 2);
        let treatments: Vec<usize> = (0..n).map(|i| i % k).collect();
        let outcomes: Vec<f64> = (0..n).map(|i| (i % 3) as f64).collect();
        let ds = BinarizedDataset::observational(inst.x.clone(), treatments, outcomes);
        let scores = ScoreMatrix::from_values(random_scores(seed, n, k), ScoreMethod::Dm);
        let mut cfg = PolicyConfig::new(2, 0.0, k);
        if with_budget {
            cfg = cfg.with_budget(1, (n / 2) as u64);
        }
        let fit = fit_policy(&ds, &scores, &cfg).expect("policy fit");
        let (_, best) = best_plan(2, 3, k, |plan| {
            if with_budget {
                let counts = optree::policy::assignment_counts(plan, &ds.x, k).ok()?;
                if counts[1] > n / 2 {
                    return None;
                }
            }
            policy_value(plan, &ds.x, &scores).ok()
        })
        .expect("oracle");
        assert_eq!(fit.objective, best, "seed {seed} budget {with_budget}");
    }
}

#[test]
fn affine_score_shift_moves_objective_by_n_beta() {
    let n = 8;
    let inst = random_classification(91, n, 3, 2);
    let treatments: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let outcomes = vec![1.0; n];
    let ds = BinarizedDataset::observational(inst.x, treatments, outcomes);
    let base = random_scores(91, n, 2);
    let beta = 2.5;
    let shifted: Vec<Vec<f64>> = base
        .iter()
        .map(|row| row.iter().map(|v| v + beta).collect())
        .collect();
    let cfg = PolicyConfig::new(2, 0.0, 2);
    let a = fit_policy(&ds, &ScoreMatrix::from_values(base, ScoreMethod::Dm), &cfg).unwrap();
    let b = fit_policy(&ds, &ScoreMatrix::from_values(shifted, ScoreMethod::Dm), &cfg).unwrap();
    assert!(
        (b.objective - a.objective - n as f64 * beta).abs() <= 1e-6,
        "shifted {} vs base {}",
        b.objective,
        a.objective
    );
}

#[test]
fn dr_and_dm_fits_agree_when_means_interpolate() {
    // One sample per (stratum, arm) cell makes the direct method interpolate.
    let x = vec![vec![0, 0], vec![0, 0], vec![0, 1], vec![0, 1], vec![1, 1], vec![1, 1]];
    let t = vec![0, 1, 0, 1, 0, 1];
    let y = vec![2.0, 5.0, 1.0, 0.0, 4.0, 4.5];
    let ds = BinarizedDataset::observational(x, t, y);
    let nu = optree::policy::estimate_nuisances(&ds, 1.0).unwrap();
    let dm = optree::policy::compute_scores(&ds, &nu, ScoreMethod::Dm);
    let dr = optree::policy::compute_scores(&ds, &nu, ScoreMethod::Dr);
    let cfg = PolicyConfig::new(1, 0.0, 2);
    let fit_dm = fit_policy(&ds, &dm, &cfg).unwrap();
    let fit_dr = fit_policy(&ds, &dr, &cfg).unwrap();
    assert_eq!(fit_dm.objective, fit_dr.objective);
}

#[test]
fn depth_three_fit_matches_oracle() {
    // Small feature space keeps the depth-3 enumeration tractable while the
    // full topology arithmetic (15 candidate nodes) gets exercised end to end.
    let ds = dataset_from(101, 8, 2, 2);
    let cfg = OCTConfig::new(3, 0.0);
    let fit = fit_classifier(&ds, &cfg).expect("fit");
    let (_, best) = best_plan(3, 2, 2, |plan| Some(evaluate_objective(plan, &ds, &cfg)))
        .expect("oracle");
    assert_eq!(fit.objective, best);
}

#[test]
fn weighted_objective_matches_oracle() {
    use optree::flow::ObjectiveMode;
    let inst = random_classification(111, 10, 3, 2);
    let weights: Vec<f64> = (0..10).map(|i| 0.5 + (i % 4) as f64).collect();
    let ds = BinarizedDataset::classification(inst.x, inst.y).with_weights(weights);
    let mut cfg = OCTConfig::new(2, 0.0);
    cfg.objective = ObjectiveMode::Weighted;
    let fit = fit_classifier(&ds, &cfg).expect("fit");
    let (_, best) = best_plan(2, 3, 2, |plan| Some(evaluate_objective(plan, &ds, &cfg)))
        .expect("oracle");
    assert_eq!(fit.objective, best);
}

#[test]
fn worst_case_objective_matches_oracle() {
    use optree::flow::ObjectiveMode;
    for seed in [121u64, 122, 123] {
        let ds = dataset_from(seed, 12, 3, 3);
        let mut cfg = OCTConfig::new(2, 0.0);
        cfg.objective = ObjectiveMode::WorstCase;
        let fit = fit_classifier(&ds, &cfg).expect("fit");
        let (_, best) = best_plan(2, 3, 3, |plan| Some(evaluate_objective(plan, &ds, &cfg)))
            .expect("oracle");
        assert!(
            (fit.objective - best).abs() <= 1e-9,
            "seed {seed}: {} vs {best}",
            fit.objective
        );
    }
}

#[test]
fn multiclass_equalized_odds_matches_filtered_oracle() {
    // Three classes: equalized odds stratifies over all three true labels.
    let inst = random_fair(131, 12, 3, 3, 2, 2);
    let ds = BinarizedDataset::classification(inst.base.x, inst.base.y)
        .with_protected(inst.group);
    let cfg = OCTConfig::new(2, 0.0);
    for bound in [0.0, 0.305, 1.0] {
        let spec = FairnessSpec::new(FairnessKind::EqualizedOdds, bound, 1);
        let fit = fit_fair(&ds, &cfg, &spec).expect("fit");
        assert!(disparity(&fit.plan, &ds, &spec).unwrap() <= bound + 1e-6);
        let (_, best) = best_plan(2, 3, 3, |plan| {
            let d = disparity(plan, &ds, &spec).ok()?;
            (d <= bound + 1e-9).then(|| evaluate_objective(plan, &ds, &cfg))
        })
        .expect("oracle");
        assert_eq!(fit.objective, best, "bound {bound}");
    }
}

#[test]
fn csp_skips_strata_missing_a_group_consistently() {
    // Legitimate value 2 is populated by group 0 only: both the constraint
    // generator and the evaluator must ignore it.
    let x = vec![
        vec![0, 0],
        vec![0, 1],
        vec![1, 0],
        vec![1, 1],
        vec![0, 0],
        vec![1, 1],
        vec![0, 1],
        vec![1, 0],
    ];
    let y = vec![1, 0, 1, 0, 1, 1, 0, 0];
    let group = vec![0, 0, 1, 1, 0, 1, 0, 1];
    // Sample 6 is the only member of legitimate value 2, so that stratum has
    // no group-1 representative.
    let legit = vec![0, 0, 0, 0, 1, 1, 2, 1];
    let ds = BinarizedDataset::classification(x, y)
        .with_protected(group)
        .with_legitimate(legit);
    let cfg = OCTConfig::new(2, 0.0);
    let spec = FairnessSpec::new(FairnessKind::ConditionalStatisticalParity, 0.13, 1);
    let fit = fit_fair(&ds, &cfg, &spec).expect("fit");
    assert!(disparity(&fit.plan, &ds, &spec).unwrap() <= 0.13 + 1e-6);
    let (_, best) = best_plan(2, 2, 2, |plan| {
        let d = disparity(plan, &ds, &spec).ok()?;
        (d <= 0.13 + 1e-9).then(|| evaluate_objective(plan, &ds, &cfg))
    })
    .expect("oracle");
    assert_eq!(fit.objective, best);
}
