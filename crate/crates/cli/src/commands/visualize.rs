//! `optree visualize`: print a saved tree as DOT.

use std::fs;

use optree::TreePlan;

use crate::args::VisualizeArgs;
use crate::{CliError, EXIT_OK};

fn names_from(flag: &Option<String>, prefix: &str, count: usize) -> Vec<String> {
    match flag {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => (0..count)
            .map(|i| {
                if prefix.is_empty() {
                    format!("{i}")
                } else {
                    format!("{prefix}{i}")
                }
            })
            .collect(),
    }
}

pub fn run(args: VisualizeArgs) -> Result<u8, CliError> {
    let text = fs::read_to_string(&args.tree)
        .map_err(|e| CliError::data(format!("{}: {e}", args.tree.display())))?;
    let plan = TreePlan::from_json_str(&text)?;

    let features = plan.max_feature().map(|f| f + 1).unwrap_or(0);
    let labels = plan.max_label().map(|k| k + 1).unwrap_or(0);
    let feature_names = names_from(&args.feature_names, "f", features);
    let label_names = names_from(&args.label_names, "", labels);

    print!("{}", plan.to_dot(&feature_names, &label_names)?);
    Ok(EXIT_OK)
}
