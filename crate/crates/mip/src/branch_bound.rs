//! Deterministic branch-and-bound over binary variables.
//!
//! Each node re-solves the LP relaxation under tightened bounds, warm
//! starting from its parent's basis via the dual simplex. Node selection is
//! best-bound (default) or depth-first; branching picks the most fractional
//! binary (default) or the lowest fractional index. All tie-breaks are fixed
//! so that repeated runs explore the identical tree.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use crate::model::{Model, VarKind};
use crate::simplex::{Engine, LpTermination, Snapshot, StdForm};
use crate::solver::{
    package_lp, worst_objective, BranchRule, Certificate, NodeSelection, SolveError, SolveResult,
    SolveStatus, SolverConfig,
};

struct Node {
    id: u64,
    /// Inherited lower bound (internal minimization space).
    bound: f64,
    overrides: Vec<(usize, f64, f64)>,
    snapshot: Option<Rc<Snapshot>>,
    gen: u64,
}

struct HeapEntry(Node);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.0.bound == other.0.bound && self.0.id == other.0.id
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: "greater" means smaller bound; ties pop the newer node,
        // which tends to continue from the basis already loaded.
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then(self.0.id.cmp(&other.0.id))
    }
}

enum Frontier {
    Heap(BinaryHeap<HeapEntry>),
    Stack(Vec<Node>),
}

impl Frontier {
    fn new(mode: NodeSelection) -> Frontier {
        match mode {
            NodeSelection::BestBound => Frontier::Heap(BinaryHeap::new()),
            NodeSelection::DepthFirst => Frontier::Stack(Vec::new()),
        }
    }

    fn push(&mut self, node: Node) {
        match self {
            Frontier::Heap(h) => h.push(HeapEntry(node)),
            Frontier::Stack(s) => s.push(node),
        }
    }

    fn pop(&mut self) -> Option<Node> {
        match self {
            Frontier::Heap(h) => h.pop().map(|e| e.0),
            Frontier::Stack(s) => s.pop(),
        }
    }

    fn min_bound(&self) -> Option<f64> {
        match self {
            Frontier::Heap(h) => h.iter().map(|e| e.0.bound).min_by(f64::total_cmp),
            Frontier::Stack(s) => s.iter().map(|n| n.bound).min_by(f64::total_cmp),
        }
    }
}

/// Validate a warm-start assignment; returns the cleaned values and their
/// internal objective, or `None` when the start is not usable.
fn accept_warm_start(
    model: &Model,
    form: &StdForm,
    config: &SolverConfig,
    values: &[f64],
) -> Option<(f64, Vec<f64>)> {
    if values.len() != model.num_variables() {
        return None;
    }
    let mut clean = values.to_vec();
    for v in model.variables() {
        let x = clean[v.id.index()];
        if !x.is_finite() || x < v.lower - config.feas_tol || x > v.upper + config.feas_tol {
            return None;
        }
        if v.kind == VarKind::Binary {
            let r = x.round();
            if (x - r).abs() > config.int_tol {
                return None;
            }
            clean[v.id.index()] = r;
        } else {
            clean[v.id.index()] = x.clamp(v.lower, v.upper);
        }
    }
    let tol = config.feas_tol * form.rhs_scale;
    for con in model.constraints() {
        let lhs: f64 = con.terms.iter().map(|&(v, c)| c * clean[v.index()]).sum();
        let ok = match con.sense {
            crate::model::ConstraintSense::Le => lhs <= con.rhs + tol,
            crate::model::ConstraintSense::Eq => (lhs - con.rhs).abs() <= tol,
            crate::model::ConstraintSense::Ge => lhs >= con.rhs - tol,
        };
        if !ok {
            return None;
        }
    }
    let internal: f64 = clean
        .iter()
        .enumerate()
        .map(|(j, &x)| form.cost[j] * x)
        .sum();
    Some((internal, clean))
}

pub(crate) fn solve(
    model: &Model,
    config: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let binaries: Vec<usize> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.id.index())
        .collect();

    let form = StdForm::from_model(model);

    // Purely continuous models reduce to a single LP solve.
    if binaries.is_empty() {
        let mut engine = Engine::new(&form, config.feas_tol);
        engine.apply_bounds(&[]);
        let term = engine
            .cold_solve()
            .map_err(|e| SolveError::Numerics(format!("{e:?}")))?;
        return Ok(package_lp(model, term, start));
    }

    let flip = |v: f64| if form.maximize { -v } else { v };

    let mut incumbent: Option<(f64, Vec<f64>)> =
        warm_start.and_then(|w| accept_warm_start(model, &form, config, w));

    let mut engine = Engine::new(&form, config.feas_tol);
    let mut frontier = Frontier::new(config.node_selection);
    let mut next_id: u64 = 0;
    let mut nodes_explored: usize = 0;
    let mut bound_trace: Vec<f64> = Vec::new();
    let mut infeasible_cert: Option<Certificate> = None;
    let mut hit_time_limit = false;

    frontier.push(Node {
        id: next_id,
        bound: f64::NEG_INFINITY,
        overrides: Vec::new(),
        snapshot: None,
        gen: 0,
    });
    next_id += 1;

    let prune_margin = |inc: f64| config.gap_tol * inc.abs().max(1.0);

    while let Some(node) = frontier.pop() {
        if let Some(limit) = config.time_limit {
            if start.elapsed().as_secs_f64() > limit {
                hit_time_limit = true;
                break;
            }
        }
        if let Some((inc_obj, _)) = &incumbent {
            if node.bound >= inc_obj - prune_margin(*inc_obj) {
                continue;
            }
        }

        let loaded = node.snapshot.is_some() && node.gen == engine.generation();
        engine.apply_bounds(&node.overrides);
        let mut term = match &node.snapshot {
            Some(snap) => engine
                .warm_solve(snap, loaded)
                .map_err(|e| SolveError::Numerics(format!("{e:?}")))?,
            None => None,
        };
        if let Some(LpTermination::Infeasible { .. }) = term {
            // Dual-simplex infeasibility is tolerance-based; confirm with a
            // full phase-I solve before pruning.
            term = None;
        }
        let term = match term {
            Some(t) => t,
            None => engine
                .cold_solve()
                .map_err(|e| SolveError::Numerics(format!("{e:?}")))?,
        };
        nodes_explored += 1;

        match term {
            LpTermination::Infeasible { row } => {
                if infeasible_cert.is_none() {
                    infeasible_cert = Some(Certificate::InfeasibleRow {
                        index: row,
                        tag: model
                            .constraints()
                            .get(row)
                            .map(|c| c.tag.clone())
                            .unwrap_or_default(),
                    });
                }
            }
            LpTermination::Unbounded { ray } => {
                // Binary variables are bounded, so an unbounded relaxation
                // comes from the continuous part and survives branching.
                return Ok(SolveResult {
                    status: SolveStatus::Unbounded,
                    objective: -worst_objective(model.sense()),
                    best_bound: -worst_objective(model.sense()),
                    values: Vec::new(),
                    nodes_explored,
                    wall_time: start.elapsed().as_secs_f64(),
                    certificate: Some(Certificate::UnboundedRay(
                        ray.into_iter()
                            .map(|(j, v)| (crate::model::VarId(j), v))
                            .collect(),
                    )),
                    bound_trace,
                });
            }
            LpTermination::Optimal { objective: z, x, .. } => {
                let dominated = incumbent
                    .as_ref()
                    .is_some_and(|(inc, _)| z >= inc - prune_margin(*inc));
                if !dominated {
                    // Fractional binaries, by the active branching rule.
                    let mut branch_var: Option<(usize, f64)> = None;
                    for &j in &binaries {
                        let frac = (x[j] - x[j].round()).abs();
                        if frac <= config.int_tol {
                            continue;
                        }
                        let dist_half = (x[j] - x[j].floor() - 0.5).abs();
                        match config.branch_rule {
                            BranchRule::LowestIndex => {
                                branch_var = Some((j, 0.0));
                                break;
                            }
                            BranchRule::MostFractional => {
                                let better = match branch_var {
                                    None => true,
                                    Some((_, best)) => dist_half < best - 1e-15,
                                };
                                if better {
                                    branch_var = Some((j, dist_half));
                                }
                            }
                        }
                    }

                    match branch_var {
                        None => {
                            // Integral point: candidate incumbent.
                            let mut clean = x.clone();
                            for &j in &binaries {
                                clean[j] = clean[j].round();
                            }
                            let val: f64 = clean
                                .iter()
                                .enumerate()
                                .map(|(j, &v)| form.cost[j] * v)
                                .sum();
                            let improves = match &incumbent {
                                None => true,
                                Some((inc, _)) => val < inc - 1e-12,
                            };
                            if improves {
                                incumbent = Some((val, clean));
                            }
                        }
                        Some((j, _)) => {
                            let snap = Rc::new(engine.snapshot());
                            let gen = engine.generation();
                            let mut down = node.overrides.clone();
                            down.push((j, 0.0, 0.0));
                            let mut up = node.overrides.clone();
                            up.push((j, 1.0, 1.0));
                            // Pushed up-then-down so depth-first dives on the
                            // zero branch; best-bound pops the newer id on ties.
                            frontier.push(Node {
                                id: next_id,
                                bound: z,
                                overrides: up,
                                snapshot: Some(snap.clone()),
                                gen,
                            });
                            next_id += 1;
                            frontier.push(Node {
                                id: next_id,
                                bound: z,
                                overrides: down,
                                snapshot: Some(snap),
                                gen,
                            });
                            next_id += 1;
                        }
                    }
                }
            }
        }

        // Proven bound over the remaining open nodes.
        let mut lb = frontier.min_bound().unwrap_or(f64::INFINITY);
        if let Some((inc, _)) = &incumbent {
            lb = lb.min(*inc);
        }
        bound_trace.push(flip(lb));

        if let Some((inc, _)) = &incumbent {
            let gap = inc - lb;
            if gap <= config.gap_tol * inc.abs().max(1.0) {
                let exact = gap <= 1e-6 * inc.abs().max(1.0);
                return Ok(finish(
                    model,
                    &form,
                    if exact {
                        SolveStatus::Optimal
                    } else {
                        SolveStatus::GapLimit
                    },
                    incumbent,
                    lb,
                    nodes_explored,
                    start,
                    bound_trace,
                    None,
                ));
            }
        }
    }

    if hit_time_limit {
        let mut lb = frontier.min_bound().unwrap_or(f64::INFINITY);
        if let Some((inc, _)) = &incumbent {
            lb = lb.min(*inc);
        }
        return Ok(finish(
            model,
            &form,
            SolveStatus::TimeLimit,
            incumbent,
            lb,
            nodes_explored,
            start,
            bound_trace,
            None,
        ));
    }

    match incumbent {
        Some(_) => {
            let lb = incumbent.as_ref().map(|(v, _)| *v).unwrap();
            Ok(finish(
                model,
                &form,
                SolveStatus::Optimal,
                incumbent,
                lb,
                nodes_explored,
                start,
                bound_trace,
                None,
            ))
        }
        None => Ok(SolveResult {
            status: SolveStatus::Infeasible,
            objective: worst_objective(model.sense()),
            best_bound: worst_objective(model.sense()),
            values: Vec::new(),
            nodes_explored,
            wall_time: start.elapsed().as_secs_f64(),
            certificate: infeasible_cert,
            bound_trace,
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    model: &Model,
    form: &StdForm,
    status: SolveStatus,
    incumbent: Option<(f64, Vec<f64>)>,
    internal_bound: f64,
    nodes_explored: usize,
    start: Instant,
    bound_trace: Vec<f64>,
    certificate: Option<Certificate>,
) -> SolveResult {
    let flip = |v: f64| if form.maximize { -v } else { v };
    match incumbent {
        Some((obj, values)) => SolveResult {
            status,
            objective: flip(obj),
            best_bound: flip(internal_bound),
            values,
            nodes_explored,
            wall_time: start.elapsed().as_secs_f64(),
            certificate,
            bound_trace,
        },
        None => SolveResult {
            status,
            objective: worst_objective(model.sense()),
            best_bound: flip(internal_bound),
            values: Vec::new(),
            nodes_explored,
            wall_time: start.elapsed().as_secs_f64(),
            certificate,
            bound_trace,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstraintSense, ObjectiveSense};
    use crate::solver::{solve_lp, solve_mip, solve_mip_warm};

    fn knapsack() -> Model {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let a = m.add_binary();
        let b = m.add_binary();
        m.add_constraint(vec![(a, 2.0), (b, 2.0)], ConstraintSense::Le, 2.0, "cap");
        m.set_objective(vec![(a, 3.0), (b, 2.0)]);
        m
    }

    #[test]
    fn tiny_knapsack() {
        let m = knapsack();
        let r = solve_mip(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-9);
        assert!((r.values[0] - 1.0).abs() < 1e-9);
        assert!(r.values[1].abs() < 1e-9);
    }

    #[test]
    fn continuous_model_matches_solve_lp() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_continuous(0.0, 5.0);
        let y = m.add_continuous(0.0, 5.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], ConstraintSense::Le, 7.0, "c");
        m.set_objective(vec![(x, 1.0), (y, 2.0)]);
        let cfg = SolverConfig::default();
        let lp = solve_lp(&m, &cfg).unwrap();
        let mip = solve_mip(&m, &cfg).unwrap();
        assert_eq!(lp.status, mip.status);
        assert_eq!(lp.objective, mip.objective);
        assert_eq!(lp.values, mip.values);
        assert_eq!(lp.nodes_explored, mip.nodes_explored);
    }

    #[test]
    fn fractional_equality_is_integer_infeasible() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let a = m.add_binary();
        m.add_constraint(vec![(a, 1.0)], ConstraintSense::Eq, 0.5, "half");
        m.set_objective(vec![(a, 1.0)]);
        let r = solve_mip(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn warm_start_seeds_incumbent() {
        let m = knapsack();
        let warm = vec![1.0, 0.0];
        let r = solve_mip_warm(&m, &SolverConfig::default(), Some(&warm)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_warm_start_is_ignored() {
        let m = knapsack();
        // Violates the capacity row.
        let warm = vec![1.0, 1.0];
        let r = solve_mip_warm(&m, &SolverConfig::default(), Some(&warm)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn bound_trace_is_monotone_for_maximization() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let vars: Vec<_> = (0..6).map(|_| m.add_binary()).collect();
        let terms: Vec<_> = vars
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, 1.0 + (i as f64) * 0.3))
            .collect();
        m.add_constraint(terms.clone(), ConstraintSense::Le, 3.7, "cap");
        m.set_objective(vars.iter().map(|&v| (v, 1.0)).collect());
        let r = solve_mip(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        for w in r.bound_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "trace not monotone: {:?}", r.bound_trace);
        }
    }

    #[test]
    fn zero_time_limit_returns_the_warm_incumbent() {
        let m = knapsack();
        let cfg = SolverConfig {
            time_limit: Some(0.0),
            ..SolverConfig::default()
        };
        let warm = vec![0.0, 1.0]; // feasible, suboptimal
        let r = solve_mip_warm(&m, &cfg, Some(&warm)).unwrap();
        assert_eq!(r.status, SolveStatus::TimeLimit);
        assert!((r.objective - 2.0).abs() < 1e-9);
        assert!(r.has_solution());
        // Bound covers the whole unexplored tree.
        assert!(r.best_bound >= r.objective - 1e-9);
    }

    #[test]
    fn loose_gap_tolerance_reports_gap_limit() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let vars: Vec<_> = (0..6).map(|_| m.add_binary()).collect();
        m.add_constraint(
            vars.iter().map(|&v| (v, 2.0)).collect(),
            ConstraintSense::Le,
            7.0,
            "cap",
        );
        m.set_objective(vars.iter().map(|&v| (v, 1.0)).collect());
        let cfg = SolverConfig {
            gap_tol: 0.9,
            ..SolverConfig::default()
        };
        let r = solve_mip(&m, &cfg).unwrap();
        // With such a loose tolerance the search stops at the first
        // incumbent; the result is within the gap, not proven optimal.
        assert_eq!(r.status, SolveStatus::GapLimit);
        assert!(r.gap() <= 0.9 + 1e-12);
    }

    #[test]
    fn depth_first_matches_best_bound_objective() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let vars: Vec<_> = (0..8).map(|_| m.add_binary()).collect();
        let w = [3.0, 5.0, 7.0, 2.0, 9.0, 4.0, 6.0, 8.0];
        let p = [4.0, 6.0, 7.0, 2.0, 10.0, 5.0, 6.0, 9.0];
        m.add_constraint(
            vars.iter().zip(w).map(|(&v, wi)| (v, wi)).collect(),
            ConstraintSense::Le,
            17.0,
            "cap",
        );
        m.set_objective(vars.iter().zip(p).map(|(&v, pi)| (v, pi)).collect());
        let best = solve_mip(&m, &SolverConfig::default()).unwrap();
        let dfs = solve_mip(
            &m,
            &SolverConfig {
                node_selection: NodeSelection::DepthFirst,
                ..SolverConfig::default()
            },
        )
        .unwrap();
        assert_eq!(best.status, SolveStatus::Optimal);
        assert_eq!(dfs.status, SolveStatus::Optimal);
        assert!((best.objective - dfs.objective).abs() < 1e-9);
    }
}
