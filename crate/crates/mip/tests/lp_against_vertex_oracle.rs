//! Randomized LPs cross-checked against an independent vertex-enumeration
//! oracle, plus weak-duality and determinism checks on every instance.

use optree_mip::{solve_lp, SolveResult, SolveStatus, SolverConfig};
use optree_testkit::{lp_oracle, models};

fn assert_deterministic_fields(a: &SolveResult, b: &SolveResult) {
    assert_eq!(a.status, b.status);
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.best_bound.to_bits(), b.best_bound.to_bits());
    assert_eq!(a.values, b.values);
    assert_eq!(a.nodes_explored, b.nodes_explored);
    assert_eq!(a.bound_trace, b.bound_trace);
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let cfg = SolverConfig::default();
    for seed in 0..100u64 {
        let model = models::random_lp(seed);
        let got = solve_lp(&model, &cfg).expect("solve");
        let oracle = lp_oracle::best_vertex(&model);
        match (&oracle, got.status) {
            (Some((best, _)), SolveStatus::Optimal) => {
                assert!(
                    (got.objective - best).abs() <= 1e-6,
                    "seed {seed}: solver {} vs oracle {best}",
                    got.objective
                );
                // Weak duality: the bound from the final reduced costs
                // matches the primal objective at optimality.
                assert!(
                    (got.objective - got.best_bound).abs() <= 1e-6,
                    "seed {seed}: duality gap {} vs {}",
                    got.objective,
                    got.best_bound
                );
            }
            (None, SolveStatus::Infeasible) => {}
            (o, s) => panic!("seed {seed}: oracle {o:?} but solver status {s:?}"),
        }

        let again = solve_lp(&model, &cfg).expect("re-solve");
        assert_deterministic_fields(&got, &again);
    }
}

#[test]
fn five_var_five_constraint_example() {
    // Fixed-seed instance of the documented shape: 5 variables, 5 rows,
    // bounded box.
    for seed in [424242u64, 77, 1009] {
        let model = models::random_lp(seed * 31 + 5);
        let got = solve_lp(&model, &SolverConfig::default()).expect("solve");
        match lp_oracle::best_vertex(&model) {
            Some((best, _)) => {
                assert_eq!(got.status, SolveStatus::Optimal);
                assert!((got.objective - best).abs() <= 1e-6);
            }
            None => assert_eq!(got.status, SolveStatus::Infeasible),
        }
    }
}
