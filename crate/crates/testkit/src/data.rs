//! Seeded generators for binary feature matrices, labels, groups, costs and
//! score matrices, used by the tree-learning test suites. Plain vectors only;
//! callers assemble their own dataset types.

use rand::Rng;

use crate::seeded_rng;

/// Random classification instance: `x` is n rows of f binary features,
/// labels are dense in `0..k` (the first k rows pin one sample per class).
pub struct ClassificationInstance {
    pub x: Vec<Vec<u8>>,
    pub y: Vec<usize>,
    pub k: usize,
}

pub fn random_classification(seed: u64, n: usize, f: usize, k: usize) -> ClassificationInstance {
    assert!(n >= k && k >= 2);
    let mut rng = seeded_rng(seed);
    let x = (0..n)
        .map(|_| (0..f).map(|_| rng.random_range(0..=1u8)).collect())
        .collect();
    let y = (0..n)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    ClassificationInstance { x, y, k }
}

/// Adds a protected group column (dense in `0..groups`) and a legitimate
/// factor column (dense in `0..legit_values`).
pub struct FairInstance {
    pub base: ClassificationInstance,
    pub group: Vec<usize>,
    pub legit: Vec<usize>,
    pub groups: usize,
    pub legit_values: usize,
}

pub fn random_fair(
    seed: u64,
    n: usize,
    f: usize,
    k: usize,
    groups: usize,
    legit_values: usize,
) -> FairInstance {
    assert!(n >= groups && n >= legit_values);
    let base = random_classification(seed, n, f, k);
    let mut rng = seeded_rng(seed ^ 0x5eed_fa1f);
    let group = (0..n)
        .map(|i| {
            if i < groups {
                i
            } else {
                rng.random_range(0..groups)
            }
        })
        .collect();
    let legit = (0..n)
        .map(|i| {
            if i < legit_values {
                i
            } else {
                rng.random_range(0..legit_values)
            }
        })
        .collect();
    FairInstance {
        base,
        group,
        legit,
        groups,
        legit_values,
    }
}

/// Integer flip-cost matrix with entries in `{1, 2, 3}`.
pub fn random_costs(seed: u64, n: usize, f: usize) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed ^ 0xc057);
    (0..n)
        .map(|_| (0..f).map(|_| rng.random_range(1..=3) as f64).collect())
        .collect()
}

/// Integer score matrix with entries in `0..=6` (n rows, k treatments).
pub fn random_scores(seed: u64, n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed ^ 0x5c0e);
    (0..n)
        .map(|_| (0..k).map(|_| rng.random_range(0..=6) as f64).collect())
        .collect()
}
