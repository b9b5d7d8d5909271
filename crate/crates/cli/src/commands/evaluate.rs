//! `optree evaluate`: traversal-based metrics of a saved tree, with an
//! optional exhaustive-enumeration cross-check.

use std::fs;

use serde::Serialize;

use optree::{
    best_plan, disparity, evaluate_objective, policy_value, worst_case_correct, FairnessKind,
    FairnessSpec, OCTConfig, ObjectiveMode, RobustSpec, ScoreMatrix, ScoreMethod, TreePlan,
};

use crate::args::EvaluateArgs;
use crate::loader::{load_dataset, load_matrix, resolve_code, resolve_roles, TaskKind};
use crate::{CliError, EXIT_OK};

#[derive(Serialize)]
struct Metrics {
    task: String,
    objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    disparity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_case_correct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    policy_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
}

#[derive(Serialize)]
struct OracleReport {
    optimum: f64,
    matches: bool,
}

fn parse_objective(s: &str) -> Result<ObjectiveMode, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "accuracy" => Ok(ObjectiveMode::Accuracy),
        "weighted" => Ok(ObjectiveMode::Weighted),
        "worst-case" | "worst_case" | "worstcase" => Ok(ObjectiveMode::WorstCase),
        other => Err(CliError::usage(format!("unknown objective '{other}'"))),
    }
}

pub fn run(args: EvaluateArgs) -> Result<u8, CliError> {
    let task = TaskKind::parse(&args.task)?;
    let text = fs::read_to_string(&args.tree)
        .map_err(|e| CliError::data(format!("{}: {e}", args.tree.display())))?;
    let plan = TreePlan::from_json_str(&text)?;

    let decls = resolve_roles(Some(task), &args.roles, &args.data, false)?;
    let (dataset, _) = load_dataset(&args.data, &decls)?;
    if let Some(max_feature) = plan.max_feature() {
        if max_feature >= dataset.num_features() {
            return Err(CliError::data(format!(
                "tree uses feature index {max_feature} but the data binarizes to {} features",
                dataset.num_features()
            )));
        }
    }

    let oct = OCTConfig {
        depth: plan.depth(),
        lambda: args.lambda,
        objective: parse_objective(&args.objective)?,
        solver: Default::default(),
    };

    let mut metrics = Metrics {
        task: task.as_str().to_string(),
        objective: 0.0,
        accuracy: None,
        disparity: None,
        worst_case_correct: None,
        policy_value: None,
        oracle: None,
    };

    let fairness_spec = match task {
        TaskKind::Fair => {
            let kind = FairnessKind::parse(args.fairness_type.as_deref().unwrap_or("SP"))
                .map_err(|e| CliError::data(e.to_string()))?;
            let positive = args
                .positive_class
                .as_deref()
                .ok_or_else(|| CliError::usage("--positive-class is required for --task fair"))?;
            let positive_class = resolve_code(positive, &dataset.label_names, "positive class")?;
            Some(FairnessSpec::new(
                kind,
                args.fairness_bound.unwrap_or(1.0),
                positive_class,
            ))
        }
        _ => None,
    };
    let robust_spec = match task {
        TaskKind::Robust => {
            let costs_path = args
                .costs
                .as_ref()
                .ok_or_else(|| CliError::usage("--costs is required for --task robust"))?;
            let epsilon = args
                .epsilon
                .ok_or_else(|| CliError::usage("--epsilon is required for --task robust"))?;
            Some(RobustSpec {
                costs: load_matrix(costs_path)?,
                epsilon,
            })
        }
        _ => None,
    };
    let scores = match task {
        TaskKind::Policy => {
            let path = args
                .scores
                .as_ref()
                .ok_or_else(|| CliError::usage("--scores is required for --task policy"))?;
            Some(ScoreMatrix::from_values(load_matrix(path)?, ScoreMethod::Dm))
        }
        _ => None,
    };

    match task {
        TaskKind::Classify | TaskKind::Fair | TaskKind::Robust => {
            let y = dataset
                .y
                .as_ref()
                .ok_or_else(|| CliError::data("data has no label column"))?;
            let predictions = plan.predict(&dataset.x)?;
            let correct = predictions.iter().zip(y).filter(|(p, t)| p == t).count();
            metrics.accuracy = Some(correct as f64 / dataset.n() as f64);
            metrics.objective = evaluate_objective(&plan, &dataset, &oct);
            if let Some(spec) = &fairness_spec {
                metrics.disparity = Some(disparity(&plan, &dataset, spec)?);
            }
            if let Some(spec) = &robust_spec {
                let wcc = worst_case_correct(&plan, &dataset, spec);
                metrics.worst_case_correct = Some(wcc);
                metrics.objective =
                    (1.0 - args.lambda) * wcc - args.lambda * plan.branch_count() as f64;
            }
        }
        TaskKind::Policy => {
            let scores = scores.as_ref().expect("required above");
            let value = policy_value(&plan, &dataset.x, scores)?;
            metrics.policy_value = Some(value);
            metrics.objective =
                (1.0 - args.lambda) * value - args.lambda * plan.branch_count() as f64;
        }
    }

    if args.oracle {
        if plan.depth() > 3 {
            return Err(CliError::data(format!(
                "oracle cross-check is limited to depth 3, tree has depth {}",
                plan.depth()
            )));
        }
        let classes = match task {
            TaskKind::Policy => dataset.num_treatments().max(
                scores.as_ref().map(|s| s.v[0].len()).unwrap_or(0),
            ),
            _ => dataset.num_classes(),
        };
        let optimum = best_plan(plan.depth(), dataset.num_features(), classes, |cand| {
            match task {
                TaskKind::Classify => Some(evaluate_objective(cand, &dataset, &oct)),
                TaskKind::Fair => {
                    let spec = fairness_spec.as_ref().expect("built above");
                    let d = disparity(cand, &dataset, spec).ok()?;
                    (d <= spec.bound + 1e-9).then(|| evaluate_objective(cand, &dataset, &oct))
                }
                TaskKind::Robust => {
                    let spec = robust_spec.as_ref().expect("built above");
                    Some(
                        (1.0 - args.lambda) * worst_case_correct(cand, &dataset, spec)
                            - args.lambda * cand.branch_count() as f64,
                    )
                }
                TaskKind::Policy => {
                    let scores = scores.as_ref().expect("built above");
                    let value = policy_value(cand, &dataset.x, scores).ok()?;
                    Some((1.0 - args.lambda) * value - args.lambda * cand.branch_count() as f64)
                }
            }
        })
        .map_err(|e| CliError::data(e.to_string()))?;
        metrics.oracle = Some(OracleReport {
            optimum: optimum.1,
            matches: (metrics.objective - optimum.1).abs() <= 1e-6,
        });
    }

    let mut text = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
    text.push('\n');
    print!("{text}");
    Ok(EXIT_OK)
}
