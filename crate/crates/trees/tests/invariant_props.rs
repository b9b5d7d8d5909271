//! Property tests over the data plumbing and the tree model.

use proptest::prelude::*;

use optree::dataset::{binarize, load_csv, BinarizationSpec, ColumnRole, RoleDecls};
use optree::oracle::enumerate_plans;
use optree::tree::NodeRole;

fn csv_from_matrix(values: &[Vec<f64>], labels: &[u8]) -> String {
    let cols = values[0].len();
    let mut text = (0..cols)
        .map(|c| format!("c{c}"))
        .collect::<Vec<_>>()
        .join(",");
    text.push_str(",y\n");
    for (row, label) in values.iter().zip(labels) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        text.push_str(&cells.join(","));
        text.push_str(&format!(",{label}\n"));
    }
    text
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binarize_is_deterministic_and_binary(
        rows in prop::collection::vec(
            prop::collection::vec(-5.0f64..5.0, 3),
            2..12,
        ),
        labels in prop::collection::vec(0u8..2, 12),
    ) {
        let labels = &labels[..rows.len()];
        let text = csv_from_matrix(&rows, labels);
        let decls = RoleDecls::new().declare("y", ColumnRole::Label);
        let table = load_csv(text.as_bytes(), &decls).unwrap();
        let spec = BinarizationSpec::infer(&table, 8);
        let a = binarize(&table, &spec).unwrap();
        let b = binarize(&table, &spec).unwrap();
        prop_assert_eq!(&a.x, &b.x);
        for row in &a.x {
            for &v in row {
                prop_assert!(v <= 1);
            }
        }
        // Threshold features are monotone nondecreasing in threshold index.
        let mut offset = 0;
        for ths in spec.thresholds.values() {
            for row in &a.x {
                for w in row[offset..offset + ths.len()].windows(2) {
                    prop_assert!(w[0] <= w[1]);
                }
            }
            offset += ths.len();
        }
    }

    #[test]
    fn one_hot_blocks_sum_to_one(
        cats in prop::collection::vec(0usize..4, 2..10),
    ) {
        let names = ["red", "green", "blue", "gray"];
        let mut text = String::from("c,y\n");
        for (i, &c) in cats.iter().enumerate() {
            text.push_str(&format!("{},{}\n", names[c], i % 2));
        }
        let decls = RoleDecls::new().declare("y", ColumnRole::Label);
        let table = load_csv(text.as_bytes(), &decls).unwrap();
        let spec = BinarizationSpec::infer(&table, 8);
        let ds = binarize(&table, &spec).unwrap();
        for row in &ds.x {
            let sum: usize = row.iter().map(|&v| v as usize).sum();
            prop_assert_eq!(sum, 1);
        }
    }

    #[test]
    fn every_enumerated_plan_routes_to_a_prediction(
        plan_pick in 0u64..1000,
        x in prop::collection::vec(0u8..2, 3),
    ) {
        let plans: Vec<_> = enumerate_plans(2, 3, 2).unwrap().collect();
        let plan = &plans[(plan_pick % plans.len() as u64) as usize];
        let path = plan.route(&x).unwrap();
        prop_assert!(path.len() <= 3);
        prop_assert!(matches!(plan.role(*path.last().unwrap()), NodeRole::Predict(_)));
    }

    #[test]
    fn depth_one_plan_count_matches_closed_form(
        f in 1usize..5,
        k in 1usize..5,
    ) {
        let count = enumerate_plans(1, f, k).unwrap().count();
        prop_assert_eq!(count, k + f * k * k);
    }
}
