//! One-pass greedy tree used to seed the solvers with a feasible incumbent.
//! Splits on the single feature with the best weighted split accuracy,
//! recursively; never worse than the majority predictor it replaces, so the
//! seed only tightens branch-and-bound pruning.

#![allow(clippy::needless_range_loop)]

use crate::tree::{NodeRole, Topology, TreePlan};

/// Weighted majority label; ties go to the lowest label.
fn majority(indices: &[usize], y: &[usize], w: &[f64], k: usize) -> (usize, f64) {
    let mut mass = vec![0.0f64; k];
    for &i in indices {
        mass[y[i]] += w[i];
    }
    let mut best = 0usize;
    for c in 1..k {
        if mass[c] > mass[best] {
            best = c;
        }
    }
    (best, mass[best])
}

/// Greedy depth-bounded tree over binary features.
pub fn greedy_tree(x: &[Vec<u8>], y: &[usize], w: &[f64], k: usize, depth: u32) -> TreePlan {
    let topo = Topology::new(depth);
    let mut roles = vec![NodeRole::Pruned; topo.num_nodes()];
    let all: Vec<usize> = (0..x.len()).collect();
    build(&topo, 1, &all, x, y, w, k, &mut roles);
    TreePlan::new(depth, roles).expect("greedy construction is structurally valid")
}

#[allow(clippy::too_many_arguments)]
fn build(
    topo: &Topology,
    node: usize,
    indices: &[usize],
    x: &[Vec<u8>],
    y: &[usize],
    w: &[f64],
    k: usize,
    roles: &mut [NodeRole],
) {
    let (maj, maj_mass) = majority(indices, y, w, k);
    if !topo.is_branch_node(node) || indices.is_empty() {
        roles[node - 1] = NodeRole::Predict(maj);
        return;
    }
    let num_features = x.first().map(|r| r.len()).unwrap_or(0);
    let mut best: Option<(usize, f64)> = None;
    for f in 0..num_features {
        let left: Vec<usize> = indices.iter().copied().filter(|&i| x[i][f] == 0).collect();
        let right: Vec<usize> = indices.iter().copied().filter(|&i| x[i][f] == 1).collect();
        if left.is_empty() || right.is_empty() {
            continue;
        }
        let (_, lm) = majority(&left, y, w, k);
        let (_, rm) = majority(&right, y, w, k);
        let score = lm + rm;
        if best.is_none_or(|(_, b)| score > b + 1e-12) {
            best = Some((f, score));
        }
    }
    match best {
        Some((f, score)) if score > maj_mass + 1e-12 => {
            roles[node - 1] = NodeRole::Branch(f);
            let left: Vec<usize> = indices.iter().copied().filter(|&i| x[i][f] == 0).collect();
            let right: Vec<usize> = indices.iter().copied().filter(|&i| x[i][f] == 1).collect();
            build(topo, topo.left(node), &left, x, y, w, k, roles);
            build(topo, topo.right(node), &right, x, y, w, k, roles);
        }
        _ => {
            roles[node - 1] = NodeRole::Predict(maj);
        }
    }
}
