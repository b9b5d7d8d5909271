//! `optree predict`: route a data file through a saved tree.

use std::fs;

use optree::TreePlan;

use crate::args::PredictArgs;
use crate::loader::{load_dataset, resolve_roles};
use crate::{CliError, EXIT_OK};

pub fn run(args: PredictArgs) -> Result<u8, CliError> {
    let text = fs::read_to_string(&args.tree)
        .map_err(|e| CliError::data(format!("{}: {e}", args.tree.display())))?;
    let plan = TreePlan::from_json_str(&text)?;

    let decls = resolve_roles(None, &args.roles, &args.data, true)?;
    let (dataset, _) = load_dataset(&args.data, &decls)?;

    if let Some(max_feature) = plan.max_feature() {
        if max_feature >= dataset.num_features() {
            return Err(CliError::data(format!(
                "tree uses feature index {max_feature} but the data binarizes to {} features",
                dataset.num_features()
            )));
        }
    }

    let predictions = plan.predict(&dataset.x)?;
    let mut out = String::from("row,prediction\n");
    for (i, p) in predictions.iter().enumerate() {
        out.push_str(&format!("{i},{p}\n"));
    }
    match &args.out {
        Some(path) => fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(EXIT_OK)
}
