//! Randomized all-binary MIPs cross-checked against exhaustive enumeration,
//! exactly, plus determinism and bound-trace monotonicity on every instance.

use optree_mip::{
    solve_mip, ConstraintSense, Model, ObjectiveSense, SolveStatus, SolverConfig,
};
use optree_testkit::{mip_oracle, models};

#[test]
fn random_binary_mips_match_enumeration() {
    let cfg = SolverConfig::default();
    for seed in 0..100u64 {
        let model = models::random_binary_mip(seed, 12);
        let got = solve_mip(&model, &cfg).expect("solve");
        let oracle = mip_oracle::best_assignment(&model);
        match (&oracle, got.status) {
            (Some((best, _)), SolveStatus::Optimal) => {
                assert!(
                    (got.objective - best).abs() <= 1e-9,
                    "seed {seed}: solver {} vs enumeration {best}",
                    got.objective
                );
                for (j, v) in got.values.iter().enumerate() {
                    assert!(
                        (v - v.round()).abs() <= 1e-6,
                        "seed {seed}: x{j}={v} not integral"
                    );
                }
            }
            (None, SolveStatus::Infeasible) => {}
            (o, s) => panic!("seed {seed}: oracle {o:?} but solver status {s:?}"),
        }

        let maximize = model.sense() == ObjectiveSense::Maximize;
        for w in got.bound_trace.windows(2) {
            if maximize {
                assert!(w[1] <= w[0] + 1e-9, "seed {seed}: trace {:?}", got.bound_trace);
            } else {
                assert!(w[1] >= w[0] - 1e-9, "seed {seed}: trace {:?}", got.bound_trace);
            }
        }

        let again = solve_mip(&model, &cfg).expect("re-solve");
        assert_eq!(got.status, again.status);
        assert_eq!(got.objective.to_bits(), again.objective.to_bits());
        assert_eq!(got.values, again.values);
        assert_eq!(got.nodes_explored, again.nodes_explored);
    }
}

#[test]
fn depth_first_agrees_with_enumeration() {
    let cfg = SolverConfig {
        node_selection: optree_mip::NodeSelection::DepthFirst,
        branch_rule: optree_mip::BranchRule::LowestIndex,
        ..SolverConfig::default()
    };
    for seed in 200..230u64 {
        let model = models::random_binary_mip(seed, 10);
        let got = solve_mip(&model, &cfg).expect("solve");
        match (mip_oracle::best_assignment(&model), got.status) {
            (Some((best, _)), SolveStatus::Optimal) => {
                assert!((got.objective - best).abs() <= 1e-9, "seed {seed}");
            }
            (None, SolveStatus::Infeasible) => {}
            (o, s) => panic!("seed {seed}: oracle {o:?} but solver status {s:?}"),
        }
    }
}

#[test]
fn knapsack_example_hits_three() {
    let mut m = Model::new(ObjectiveSense::Maximize);
    let a = m.add_binary();
    let b = m.add_binary();
    m.add_constraint(vec![(a, 2.0), (b, 2.0)], ConstraintSense::Le, 2.0, "cap");
    m.set_objective(vec![(a, 3.0), (b, 2.0)]);
    let r = solve_mip(&m, &SolverConfig::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert_eq!(r.objective, 3.0);
    assert_eq!(r.values[0], 1.0);
    assert_eq!(r.values[1], 0.0);
}

/// Mixed binary/continuous models through a second route: enumerate the
/// binary assignments, fix them as bounds, and let the (separately
/// vertex-verified) LP solver finish each leaf.
#[test]
fn mixed_models_match_enumerate_and_solve() {
    use optree_mip::{solve_lp, VarKind};
    use rand::Rng;

    let cfg = SolverConfig::default();
    for seed in 300..340u64 {
        let mut rng = optree_testkit::seeded_rng(seed ^ 0xabcd);
        let nb = rng.random_range(2..=6);
        let nc = rng.random_range(1..=3);
        let mut model = Model::new(if rng.random_bool(0.5) {
            ObjectiveSense::Maximize
        } else {
            ObjectiveSense::Minimize
        });
        let bins: Vec<_> = (0..nb).map(|_| model.add_binary()).collect();
        let conts: Vec<_> = (0..nc)
            .map(|_| {
                let lo = rng.random_range(-2..=0) as f64;
                model.add_continuous(lo, lo + rng.random_range(1..=4) as f64)
            })
            .collect();
        let all: Vec<_> = bins.iter().chain(&conts).copied().collect();
        for r in 0..rng.random_range(1..=4) {
            let mut terms = Vec::new();
            for &v in &all {
                if rng.random_bool(0.6) {
                    let c = rng.random_range(-3..=3);
                    if c != 0 {
                        terms.push((v, c as f64));
                    }
                }
            }
            if terms.is_empty() {
                terms.push((all[0], 1.0));
            }
            let sense = if rng.random_bool(0.5) {
                ConstraintSense::Le
            } else {
                ConstraintSense::Ge
            };
            model.add_constraint(terms, sense, rng.random_range(-4..=8) as f64, format!("r{r}"));
        }
        model.set_objective(all.iter().map(|&v| (v, rng.random_range(-5..=5) as f64)).collect());

        let got = solve_mip(&model, &cfg).expect("solve");

        // Second route: fix each assignment and solve the continuous rest.
        let maximize = model.sense() == ObjectiveSense::Maximize;
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << nb) {
            // Rebuild with the binaries pinned via bounds.
            let mut pinned = Model::new(model.sense());
            for v in model.variables() {
                if v.kind == VarKind::Binary {
                    let bit = ((mask >> v.id.index()) & 1) as f64;
                    pinned.add_continuous(bit, bit);
                } else {
                    pinned.add_continuous(v.lower, v.upper);
                }
            }
            for con in model.constraints() {
                pinned.add_constraint(con.terms.clone(), con.sense, con.rhs, con.tag.clone());
            }
            pinned.set_objective(model.objective().to_vec());
            let leaf = solve_lp(&pinned, &cfg).expect("leaf lp");
            if leaf.status == SolveStatus::Optimal {
                best = Some(match best {
                    None => leaf.objective,
                    Some(b) => {
                        if maximize {
                            b.max(leaf.objective)
                        } else {
                            b.min(leaf.objective)
                        }
                    }
                });
            }
        }

        match (best, got.status) {
            (Some(b), SolveStatus::Optimal) => {
                assert!(
                    (got.objective - b).abs() <= 1e-6,
                    "seed {seed}: branch-and-bound {} vs enumerate-and-solve {b}",
                    got.objective
                );
            }
            (None, SolveStatus::Infeasible) => {}
            (o, s) => panic!("seed {seed}: enumerate-and-solve {o:?}, solver {s:?}"),
        }
    }
}
