//! Writing a model to LP text and reading it back must preserve the optimum.

use optree_mip::{
    parse_lp_str, solve_lp, solve_mip, write_lp_string, SolveStatus, SolverConfig,
};
use optree_testkit::models;

#[test]
fn roundtrip_preserves_lp_optima() {
    let cfg = SolverConfig::default();
    for seed in 0..10u64 {
        let model = models::random_lp(seed);
        let text = write_lp_string(&model);
        let back = parse_lp_str(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        let a = solve_lp(&model, &cfg).expect("original");
        let b = solve_lp(&back, &cfg).expect("reparsed");
        assert_eq!(a.status, b.status, "seed {seed}");
        if a.status == SolveStatus::Optimal {
            assert!(
                (a.objective - b.objective).abs() <= 1e-6,
                "seed {seed}: {} vs {}",
                a.objective,
                b.objective
            );
        }
    }
}

#[test]
fn roundtrip_preserves_mip_optima() {
    let cfg = SolverConfig::default();
    for seed in 50..60u64 {
        let model = models::random_binary_mip(seed, 10);
        let text = write_lp_string(&model);
        let back = parse_lp_str(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        let a = solve_mip(&model, &cfg).expect("original");
        let b = solve_mip(&back, &cfg).expect("reparsed");
        assert_eq!(a.status, b.status, "seed {seed}");
        if a.status == SolveStatus::Optimal {
            assert!(
                (a.objective - b.objective).abs() <= 1e-6,
                "seed {seed}: {} vs {}",
                a.objective,
                b.objective
            );
        }
    }
}

#[test]
fn write_to_disk_and_back() {
    let model = models::random_binary_mip(7, 8);
    let dir = std::env::temp_dir().join("optree_lp_roundtrip_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.lp");
    optree_mip::write_lp_file(&model, &path).expect("write");
    let text = std::fs::read_to_string(&path).expect("read");
    let back = parse_lp_str(&text).expect("parse");
    assert_eq!(back.num_variables(), model.num_variables());
    assert_eq!(back.num_constraints(), model.num_constraints());
    std::fs::remove_dir_all(&dir).ok();
}
