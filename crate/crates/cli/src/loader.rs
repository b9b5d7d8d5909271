//! Data-loading helpers shared by the subcommands: role resolution, CSV
//! ingestion and binarization, numeric matrix files (costs, scores).

use std::io::BufRead;
use std::path::Path;

use optree::{
    binarize, load_csv_path, BinarizationSpec, BinarizedDataset, ColumnRole, RoleDecls,
};

use crate::args::RoleFlags;
use crate::CliError;

/// Task selector shared by fit and evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Classify,
    Fair,
    Robust,
    Policy,
}

impl TaskKind {
    pub fn parse(s: &str) -> Result<TaskKind, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "classify" | "classification" => Ok(TaskKind::Classify),
            "fair" => Ok(TaskKind::Fair),
            "robust" => Ok(TaskKind::Robust),
            "policy" | "prescriptive" => Ok(TaskKind::Policy),
            other => Err(CliError::usage(format!(
                "unknown task '{other}' (expected classify, fair, robust or policy)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Classify => "classify",
            TaskKind::Fair => "fair",
            TaskKind::Robust => "robust",
            TaskKind::Policy => "policy",
        }
    }
}

fn header_of(path: &Path) -> Result<Vec<String>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut line = String::new();
    std::io::BufReader::new(file)
        .read_line(&mut line)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(line
        .trim_end()
        .split(',')
        .map(|s| s.trim().to_string())
        .collect())
}

/// Resolve role declarations: conventional defaults for the task, overridden
/// by a roles file, overridden by explicit flags. With `lenient` set,
/// defaulted names missing from the header are dropped instead of failing
/// (used by predict, where a label column may legitimately be absent).
pub fn resolve_roles(
    task: Option<TaskKind>,
    flags: &RoleFlags,
    data: &Path,
    lenient: bool,
) -> Result<RoleDecls, CliError> {
    let mut assignment: Vec<(ColumnRole, String, bool)> = Vec::new(); // (role, column, from_default)
    let set = |role: ColumnRole, col: &str, default: bool, list: &mut Vec<(ColumnRole, String, bool)>| {
        list.retain(|(r, _, _)| *r != role);
        list.push((role, col.to_string(), default));
    };

    match task {
        Some(TaskKind::Classify) | Some(TaskKind::Robust) => {
            set(ColumnRole::Label, "y", true, &mut assignment);
        }
        Some(TaskKind::Fair) => {
            set(ColumnRole::Label, "y", true, &mut assignment);
            set(ColumnRole::Protected, "protected", true, &mut assignment);
        }
        Some(TaskKind::Policy) => {
            set(ColumnRole::Treatment, "treatment", true, &mut assignment);
            set(ColumnRole::Outcome, "outcome", true, &mut assignment);
        }
        None => {
            // Predict: exclude conventional non-feature columns when present.
            set(ColumnRole::Label, "y", true, &mut assignment);
        }
    }

    if let Some(path) = &flags.roles {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let decls = RoleDecls::parse_key_value(&text).map_err(CliError::from)?;
        for (col, role) in decls.pairs() {
            set(*role, col, false, &mut assignment);
        }
    }

    for (role, flag) in [
        (ColumnRole::Label, &flags.label),
        (ColumnRole::Protected, &flags.protected),
        (ColumnRole::Legitimate, &flags.legitimate),
        (ColumnRole::Treatment, &flags.treatment),
        (ColumnRole::Outcome, &flags.outcome),
    ] {
        if let Some(col) = flag {
            set(role, col, false, &mut assignment);
        }
    }

    let header = header_of(data)?;
    let mut decls = RoleDecls::new();
    for (role, col, from_default) in assignment {
        if !header.contains(&col) {
            if from_default || lenient {
                continue;
            }
            return Err(CliError::data(format!(
                "declared column '{col}' not present in the header"
            )));
        }
        decls = decls.declare(col, role);
    }
    Ok(decls)
}

/// Load and binarize a CSV under resolved roles; returns the dataset and the
/// spec that produced it (recorded in the manifest).
pub fn load_dataset(
    data: &Path,
    decls: &RoleDecls,
) -> Result<(BinarizedDataset, BinarizationSpec), CliError> {
    let table = load_csv_path(data, decls).map_err(CliError::from)?;
    let spec = BinarizationSpec::infer(&table, 8);
    let ds = binarize(&table, &spec).map_err(CliError::from)?;
    Ok((ds, spec))
}

/// Numeric matrix CSV: a header row is detected and skipped when its cells do
/// not all parse as numbers.
pub fn load_matrix(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        match cells {
            Ok(row) => rows.push(row),
            Err(e) => {
                if i == 0 {
                    continue; // header row
                }
                return Err(CliError::data(format!(
                    "{}: line {}: {e}",
                    path.display(),
                    i + 1
                )));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::data(format!("{}: no numeric rows", path.display())));
    }
    let width = rows[0].len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(CliError::data(format!(
            "{}: row {} has {} cells, expected {width}",
            path.display(),
            i + 1,
            row.len()
        )));
    }
    Ok(rows)
}

/// Resolve a label or treatment name (or bare index) against a name list.
pub fn resolve_code(value: &str, names: &[String], what: &str) -> Result<usize, CliError> {
    if let Some(idx) = names.iter().position(|n| n == value) {
        return Ok(idx);
    }
    if let Ok(idx) = value.parse::<usize>() {
        if idx < names.len() {
            return Ok(idx);
        }
    }
    Err(CliError::data(format!(
        "{what} '{value}' does not name any of {names:?}"
    )))
}
