//! Exhaustive enumeration of valid tree plans at small depth.
//!
//! Plans of a subtree of height `h` over `F` features and `K` labels count
//! `N_0 = K` and `N_h = K + F * N_{h-1}^2`: a node either predicts one of the
//! `K` labels (everything below pruned) or branches on one of `F` features
//! with two independent subtrees. Enumeration decodes a running index into
//! that mixed radix, so iteration is lazy and deterministic: predictions
//! first, then branches by feature, left subtree major.

use thiserror::Error;

use crate::tree::{NodeRole, Topology, TreePlan};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("enumeration guard: depth {0} exceeds the maximum of 3")]
    DepthGuard(u32),
    #[error("need at least one feature and one label")]
    Degenerate,
    #[error("plan count overflow at depth {0}")]
    Overflow(u32),
    #[error("no plan passes the feasibility filter")]
    NoFeasiblePlan,
}

/// Lazy stream over every structurally valid plan of the given shape.
#[derive(Debug)]
pub struct PlanIterator {
    depth: u32,
    features: usize,
    labels: usize,
    /// `counts[h]` = number of subtree plans of height `h`.
    counts: Vec<u64>,
    next_index: u64,
    total: u64,
}

impl PlanIterator {
    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Number of plans of a complete subtree of height `h`.
fn subtree_counts(depth: u32, features: u64, labels: u64) -> Option<Vec<u64>> {
    let mut counts = vec![labels];
    for _ in 0..depth {
        let prev = *counts.last().unwrap();
        let sq = prev.checked_mul(prev)?;
        let branches = features.checked_mul(sq)?;
        counts.push(labels.checked_add(branches)?);
    }
    Some(counts)
}

/// Enumerate every valid [`TreePlan`] of the given depth; depth is capped at
/// 3 because the count grows doubly exponentially.
pub fn enumerate_plans(depth: u32, features: usize, labels: usize) -> Result<PlanIterator, OracleError> {
    if depth > 3 {
        return Err(OracleError::DepthGuard(depth));
    }
    if depth == 0 || features == 0 || labels == 0 {
        return Err(OracleError::Degenerate);
    }
    let counts = subtree_counts(depth, features as u64, labels as u64)
        .ok_or(OracleError::Overflow(depth))?;
    let total = *counts.last().unwrap();
    Ok(PlanIterator {
        depth,
        features,
        labels,
        counts,
        next_index: 0,
        total,
    })
}

impl Iterator for PlanIterator {
    type Item = TreePlan;

    fn next(&mut self) -> Option<TreePlan> {
        if self.next_index >= self.total {
            return None;
        }
        let idx = self.next_index;
        self.next_index += 1;
        let topo = Topology::new(self.depth);
        let mut roles = vec![NodeRole::Pruned; topo.num_nodes()];
        decode(
            idx,
            1,
            self.depth,
            &self.counts,
            self.features as u64,
            self.labels as u64,
            &topo,
            &mut roles,
        );
        Some(TreePlan::new(self.depth, roles).expect("decoded plans are valid"))
    }
}

#[allow(clippy::too_many_arguments)]
fn decode(
    idx: u64,
    node: usize,
    height: u32,
    counts: &[u64],
    features: u64,
    labels: u64,
    topo: &Topology,
    roles: &mut [NodeRole],
) {
    if idx < labels {
        roles[node - 1] = NodeRole::Predict(idx as usize);
        return;
    }
    debug_assert!(height > 0);
    let rem = idx - labels;
    let sub = counts[(height - 1) as usize];
    let per_feature = sub * sub;
    let feature = rem / per_feature;
    let inner = rem % per_feature;
    let left_idx = inner / sub;
    let right_idx = inner % sub;
    roles[node - 1] = NodeRole::Branch(feature as usize);
    let _ = features;
    decode(
        left_idx,
        topo.left(node),
        height - 1,
        counts,
        features,
        labels,
        topo,
        roles,
    );
    decode(
        right_idx,
        topo.right(node),
        height - 1,
        counts,
        features,
        labels,
        topo,
        roles,
    );
}

/// Argmax of `evaluator` over every enumerated plan; plans mapped to `None`
/// are filtered out. Ties keep the earliest plan in enumeration order.
pub fn best_plan(
    depth: u32,
    features: usize,
    labels: usize,
    mut evaluator: impl FnMut(&TreePlan) -> Option<f64>,
) -> Result<(TreePlan, f64), OracleError> {
    let mut best: Option<(TreePlan, f64)> = None;
    for plan in enumerate_plans(depth, features, labels)? {
        let Some(value) = evaluator(&plan) else {
            continue;
        };
        match &best {
            Some((_, b)) if value <= *b => {}
            _ => best = Some((plan, value)),
        }
    }
    best.ok_or(OracleError::NoFeasiblePlan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth1_counts_match_closed_form() {
        // K + F * K^2
        assert_eq!(enumerate_plans(1, 1, 2).unwrap().count(), 6);
        assert_eq!(enumerate_plans(1, 2, 2).unwrap().count(), 10);
        assert_eq!(enumerate_plans(1, 1, 1).unwrap().count(), 2);
    }

    #[test]
    fn depth2_count_matches_recurrence() {
        let n1 = 2 + 2 * 4; // F=2, K=2
        let expected = 2 + 2 * n1 * n1;
        assert_eq!(enumerate_plans(2, 2, 2).unwrap().count() as u64, expected);
    }

    #[test]
    fn total_matches_stream_length() {
        let it = enumerate_plans(2, 3, 2).unwrap();
        let total = it.total();
        assert_eq!(it.count() as u64, total);
    }

    #[test]
    fn depth_guard_fires() {
        assert_eq!(enumerate_plans(4, 2, 2).unwrap_err(), OracleError::DepthGuard(4));
    }

    #[test]
    fn plans_are_unique() {
        let mut seen = std::collections::BTreeSet::new();
        for plan in enumerate_plans(1, 2, 2).unwrap() {
            let key = format!("{:?}", plan.roles());
            assert!(seen.insert(key), "duplicate plan");
        }
        assert_eq!(seen.len(), 10);
    }

    #[test]
    fn constant_evaluator_returns_first_plan() {
        let (plan, value) = best_plan(1, 1, 2, |_| Some(0.0)).unwrap();
        // First enumerated plan is the root prediction of label 0.
        assert_eq!(plan.role(1), NodeRole::Predict(0));
        assert_eq!(value, 0.0);
    }

    #[test]
    fn filter_that_rejects_everything_is_an_error() {
        assert_eq!(
            best_plan(1, 1, 2, |_| None).unwrap_err(),
            OracleError::NoFeasiblePlan
        );
    }
}
