//! Seeded random model generators. Coefficients are small integers so that
//! objective values are exactly representable and oracle comparisons can be
//! tight.

use optree_mip::{ConstraintSense, Model, ObjectiveSense};
use rand::Rng;

use crate::seeded_rng;

/// Random LP with a bounded box: 2-5 variables, 2-5 inequality rows.
pub fn random_lp(seed: u64) -> Model {
    let mut rng = seeded_rng(seed);
    let n = rng.random_range(2..=5);
    let m = rng.random_range(2..=5);
    let sense = if rng.random_bool(0.5) {
        ObjectiveSense::Maximize
    } else {
        ObjectiveSense::Minimize
    };
    let mut model = Model::new(sense);
    let mut vars = Vec::with_capacity(n);
    for _ in 0..n {
        let lo = rng.random_range(-3..=1) as f64;
        let width = rng.random_range(1..=6) as f64;
        vars.push(model.add_continuous(lo, lo + width));
    }
    for r in 0..m {
        let mut terms = Vec::new();
        for &v in &vars {
            if rng.random_bool(0.7) {
                let c = rng.random_range(-3..=3);
                if c != 0 {
                    terms.push((v, c as f64));
                }
            }
        }
        if terms.is_empty() {
            terms.push((vars[0], 1.0));
        }
        let cs = if rng.random_bool(0.5) {
            ConstraintSense::Le
        } else {
            ConstraintSense::Ge
        };
        let rhs = rng.random_range(-6..=10) as f64;
        model.add_constraint(terms, cs, rhs, format!("r{r}"));
    }
    let obj = vars
        .iter()
        .map(|&v| (v, rng.random_range(-5..=5) as f64))
        .collect();
    model.set_objective(obj);
    model
}

/// Random all-binary MIP with at most `max_binaries` variables.
pub fn random_binary_mip(seed: u64, max_binaries: usize) -> Model {
    let mut rng = seeded_rng(seed);
    let n = rng.random_range(2..=max_binaries);
    let m = rng.random_range(1..=5);
    let sense = if rng.random_bool(0.5) {
        ObjectiveSense::Maximize
    } else {
        ObjectiveSense::Minimize
    };
    let mut model = Model::new(sense);
    let vars: Vec<_> = (0..n).map(|_| model.add_binary()).collect();
    for r in 0..m {
        let mut terms = Vec::new();
        let mut abs_sum = 0i64;
        for &v in &vars {
            if rng.random_bool(0.6) {
                let c = rng.random_range(-3..=3_i64);
                if c != 0 {
                    abs_sum += c.abs();
                    terms.push((v, c as f64));
                }
            }
        }
        if terms.is_empty() {
            terms.push((vars[0], 1.0));
            abs_sum = 1;
        }
        let cs = match rng.random_range(0..10) {
            0 => ConstraintSense::Eq,
            1..=5 => ConstraintSense::Le,
            _ => ConstraintSense::Ge,
        };
        let rhs = rng.random_range(-2..=abs_sum.max(1)) as f64;
        model.add_constraint(terms, cs, rhs, format!("r{r}"));
    }
    let obj = vars
        .iter()
        .map(|&v| (v, rng.random_range(-5..=5) as f64))
        .collect();
    model.set_objective(obj);
    model
}
