//! `optree fit`: run a pipeline and write manifest.json, tree.json, tree.dot.

use std::collections::BTreeMap;
use std::fs;

use optree::{
    add_fairness_constraints, build_flow_model, build_policy_model, compute_scores,
    estimate_nuisances, fit_classifier, fit_fair, fit_policy, fit_robust, FairnessKind,
    FairnessSpec, FitResult, OCTConfig, ObjectiveMode, PolicyConfig, RobustSpec, ScoreMatrix,
    ScoreMethod,
};

use crate::args::FitArgs;
use crate::loader::{load_dataset, load_matrix, resolve_code, resolve_roles, TaskKind};
use crate::manifest::{
    ConfigSection, DataSection, FairnessSection, PolicySection, ResultSection, RobustSection,
    RunManifest, SolverSection,
};
use crate::{CliError, EXIT_LIMIT, EXIT_OK};

fn parse_objective(s: &str) -> Result<ObjectiveMode, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "accuracy" => Ok(ObjectiveMode::Accuracy),
        "weighted" => Ok(ObjectiveMode::Weighted),
        "worst-case" | "worst_case" | "worstcase" => Ok(ObjectiveMode::WorstCase),
        other => Err(CliError::usage(format!(
            "unknown objective '{other}' (expected accuracy, weighted or worst-case)"
        ))),
    }
}

fn apply_solver_flags(cfg: &mut optree_mip::SolverConfig, args: &FitArgs) {
    if let Some(g) = args.gap_tol {
        cfg.gap_tol = g;
    }
    cfg.time_limit = args.time_limit.or_else(|| {
        std::env::var("OPTREE_TIME_LIMIT")
            .ok()
            .and_then(|v| v.parse().ok())
    });
}

pub fn run(args: FitArgs) -> Result<u8, CliError> {
    let task = TaskKind::parse(&args.task)?;
    let decls = resolve_roles(Some(task), &args.roles, &args.data, false)?;
    let (dataset, spec) = load_dataset(&args.data, &decls)?;

    let mut oct = OCTConfig::new(args.depth, args.lambda);
    oct.objective = parse_objective(&args.objective)?;
    apply_solver_flags(&mut oct.solver, &args);

    let mut fairness_section = None;
    let mut robust_section = None;
    let mut policy_section = None;
    let mut policy_model_inputs: Option<(ScoreMatrix, PolicyConfig)> = None;

    let fit: FitResult = match task {
        TaskKind::Classify => fit_classifier(&dataset, &oct)?,
        TaskKind::Fair => {
            let kind_str = args
                .fairness_type
                .as_deref()
                .ok_or_else(|| CliError::usage("--fairness-type is required for --task fair"))?;
            let kind = FairnessKind::parse(kind_str).map_err(|e| CliError::data(e.to_string()))?;
            let bound = args
                .fairness_bound
                .ok_or_else(|| CliError::usage("--fairness-bound is required for --task fair"))?;
            let positive = args
                .positive_class
                .as_deref()
                .ok_or_else(|| CliError::usage("--positive-class is required for --task fair"))?;
            let positive_class = resolve_code(positive, &dataset.label_names, "positive class")?;
            if dataset.protected_names.len() < 2 {
                eprintln!("note: single protected group; fairness constraints are vacuous");
            }
            let spec = FairnessSpec::new(kind, bound, positive_class);
            fairness_section = Some(FairnessSection {
                kind: kind.to_string(),
                bound,
                positive_class: dataset.label_names[positive_class].clone(),
            });
            fit_fair(&dataset, &oct, &spec)?
        }
        TaskKind::Robust => {
            let costs_path = args
                .costs
                .as_ref()
                .ok_or_else(|| CliError::usage("--costs is required for --task robust"))?;
            let epsilon = args
                .epsilon
                .ok_or_else(|| CliError::usage("--epsilon is required for --task robust"))?;
            let costs = load_matrix(costs_path)?;
            let spec = RobustSpec { costs, epsilon };
            robust_section = Some(RobustSection {
                costs: costs_path.display().to_string(),
                epsilon,
            });
            fit_robust(&dataset, &oct, &spec)?
        }
        TaskKind::Policy => {
            let k = dataset.num_treatments();
            let mut config = PolicyConfig::new(args.depth, args.lambda, k);
            config.solver = oct.solver.clone();
            let mut budget_echo = BTreeMap::new();
            for raw in &args.budgets {
                let (name, cap) = raw.split_once('=').ok_or_else(|| {
                    CliError::usage(format!("--budget expects TREATMENT=COUNT, got '{raw}'"))
                })?;
                let arm = resolve_code(name.trim(), &dataset.treatment_names, "treatment")?;
                let cap: u64 = cap.trim().parse().map_err(|_| {
                    CliError::usage(format!("--budget count must be an integer, got '{cap}'"))
                })?;
                config = config.with_budget(arm, cap);
                budget_echo.insert(dataset.treatment_names[arm].clone(), cap);
            }
            let scores = match &args.scores {
                Some(path) => {
                    policy_section = Some(PolicySection {
                        scores: Some(path.display().to_string()),
                        method: None,
                        alpha: None,
                        budgets: budget_echo,
                    });
                    ScoreMatrix::from_values(load_matrix(path)?, ScoreMethod::Dm)
                }
                None => {
                    let method = ScoreMethod::parse(&args.score_method)
                        .map_err(|e| CliError::usage(e.to_string()))?;
                    policy_section = Some(PolicySection {
                        scores: None,
                        method: Some(args.score_method.to_ascii_lowercase()),
                        alpha: Some(args.alpha),
                        budgets: budget_echo,
                    });
                    let nuisances = estimate_nuisances(&dataset, args.alpha)?;
                    compute_scores(&dataset, &nuisances, method)
                }
            };
            let fit = fit_policy(&dataset, &scores, &config)?;
            policy_model_inputs = Some((scores, config));
            fit
        }
    };

    let class_names = match task {
        TaskKind::Policy => dataset.treatment_names.clone(),
        _ => dataset.label_names.clone(),
    };
    let predictions = fit.plan.predict(&dataset.x)?;
    let tree_json = fit.plan.to_json_string();
    let dot = fit.plan.to_dot(&dataset.feature_names, &class_names)?;

    fs::create_dir_all(&args.out_dir)?;
    fs::write(args.out_dir.join("tree.json"), &tree_json)?;
    fs::write(args.out_dir.join("tree.dot"), &dot)?;

    if args.write_lp {
        let model = match task {
            TaskKind::Classify => Some(build_flow_model(&dataset, &oct)?.0),
            TaskKind::Fair => {
                // Rebuild exactly what was solved: flow model plus the rows.
                let kind =
                    FairnessKind::parse(args.fairness_type.as_deref().unwrap_or("SP")).unwrap();
                let bound = args.fairness_bound.unwrap_or(1.0);
                let positive = resolve_code(
                    args.positive_class.as_deref().unwrap_or_default(),
                    &dataset.label_names,
                    "positive class",
                )?;
                let fairness = FairnessSpec::new(kind, bound, positive);
                let (mut model, handles) = build_flow_model(&dataset, &oct)?;
                add_fairness_constraints(&mut model, &handles, &fairness, &dataset)?;
                Some(model)
            }
            TaskKind::Policy => {
                let (scores, config) = policy_model_inputs
                    .as_ref()
                    .expect("set by the policy fit arm");
                Some(build_policy_model(&dataset, scores, config)?.0)
            }
            TaskKind::Robust => {
                return Err(CliError::usage(
                    "--write-lp is not available for --task robust: the fit is a sequence of models",
                ))
            }
        };
        if let Some(model) = model {
            optree_mip::write_lp_file(&model, args.out_dir.join("model.lp"))?;
        }
    }

    let manifest = RunManifest {
        task: task.as_str().to_string(),
        data: DataSection {
            path: args.data.display().to_string(),
            rows: dataset.n(),
            features: dataset.num_features(),
            feature_names: dataset.feature_names.clone(),
            classes: dataset.label_names.clone(),
            treatments: dataset.treatment_names.clone(),
            thresholds: spec.thresholds.clone(),
            categories: spec.categories.clone(),
        },
        config: ConfigSection {
            depth: args.depth,
            lambda: args.lambda,
            objective: args.objective.to_ascii_lowercase(),
            fairness: fairness_section,
            robust: robust_section,
            policy: policy_section,
            solver: SolverSection {
                gap_tol: oct.solver.gap_tol,
                time_limit: oct.solver.time_limit,
            },
        },
        result: ResultSection {
            status: fit.solve.status.as_str().to_string(),
            objective: fit.objective,
            best_bound: fit.solve.best_bound,
            gap: fit.solve.gap(),
            nodes_explored: fit.solve.nodes_explored,
            solves: fit.solves,
            wall_time_seconds: fit.solve.wall_time,
            limited: fit.limited,
        },
        training_predictions: predictions,
        tree: serde_json::from_str(&tree_json).expect("tree json is valid"),
    };
    fs::write(args.out_dir.join("manifest.json"), manifest.to_json_string())?;

    println!(
        "{}: objective {} ({} nodes, {} solve{}, {:.2}s)",
        fit.solve.status.as_str(),
        fit.objective,
        fit.solve.nodes_explored,
        fit.solves,
        if fit.solves == 1 { "" } else { "s" },
        fit.solve.wall_time
    );
    Ok(if fit.limited { EXIT_LIMIT } else { EXIT_OK })
}
