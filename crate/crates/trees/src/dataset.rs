//! Tabular ingestion, feature binarization, and task-specific validation.
//!
//! The fit pipelines consume a [`BinarizedDataset`]: an n x F matrix of 0/1
//! features plus labels, or treatment/outcome columns, and optional protected
//! and legitimate-factor attributes. CSV files come in through [`load_csv`]
//! with per-column role declarations; [`binarize`] turns numeric columns into
//! threshold features and categorical columns into one-hot blocks. Missing
//! values are rejected rather than imputed.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

/// Role a column plays in a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    Feature,
    Label,
    Protected,
    Legitimate,
    Treatment,
    Outcome,
}

impl ColumnRole {
    pub fn parse(s: &str) -> Result<ColumnRole, DataError> {
        match s.to_ascii_lowercase().as_str() {
            "feature" => Ok(ColumnRole::Feature),
            "label" => Ok(ColumnRole::Label),
            "protected" => Ok(ColumnRole::Protected),
            "legitimate" => Ok(ColumnRole::Legitimate),
            "treatment" => Ok(ColumnRole::Treatment),
            "outcome" => Ok(ColumnRole::Outcome),
            other => Err(DataError::UnknownRole {
                name: other.to_string(),
            }),
        }
    }

    fn unique(&self) -> bool {
        !matches!(self, ColumnRole::Feature)
    }
}

impl fmt::Display for ColumnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ColumnRole::Feature => "feature",
            ColumnRole::Label => "label",
            ColumnRole::Protected => "protected",
            ColumnRole::Legitimate => "legitimate",
            ColumnRole::Treatment => "treatment",
            ColumnRole::Outcome => "outcome",
        };
        f.write_str(s)
    }
}

/// Explicit column-to-role declarations; undeclared columns are features.
#[derive(Debug, Clone, Default)]
pub struct RoleDecls {
    pairs: Vec<(String, ColumnRole)>,
}

impl RoleDecls {
    pub fn new() -> RoleDecls {
        RoleDecls::default()
    }

    pub fn declare(mut self, column: impl Into<String>, role: ColumnRole) -> RoleDecls {
        self.pairs.push((column.into(), role));
        self
    }

    /// Parse `column=role` lines (blank lines and `#` comments ignored).
    pub fn parse_key_value(text: &str) -> Result<RoleDecls, DataError> {
        let mut decls = RoleDecls::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((col, role)) = line.split_once('=') else {
                return Err(DataError::BadRoleLine {
                    line: lineno + 1,
                    text: line.to_string(),
                });
            };
            decls
                .pairs
                .push((col.trim().to_string(), ColumnRole::parse(role.trim())?));
        }
        Ok(decls)
    }

    pub fn pairs(&self) -> &[(String, ColumnRole)] {
        &self.pairs
    }
}

/// One cell of a raw table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
}

impl Cell {
    fn parse(s: &str) -> Result<Cell, DataError> {
        let t = s.trim();
        if t.is_empty() {
            return Err(DataError::MissingValue);
        }
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Cell::Number(v)),
            _ => Ok(Cell::Text(t.to_string())),
        }
    }

    /// Canonical text used for category matching and name encoding.
    pub fn canonical(&self) -> String {
        match self {
            Cell::Number(v) => format_num(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub(crate) fn format_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone)]
pub struct RawColumn {
    pub name: String,
    pub role: ColumnRole,
    pub values: Vec<Cell>,
}

/// A rectangular table with role-annotated columns.
#[derive(Debug, Clone)]
pub struct RawTable {
    columns: Vec<RawColumn>,
    n_rows: usize,
}

impl RawTable {
    pub fn columns(&self) -> &[RawColumn] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, role: ColumnRole) -> Option<&RawColumn> {
        self.columns.iter().find(|c| c.role == role)
    }

    pub fn feature_columns(&self) -> impl Iterator<Item = &RawColumn> {
        self.columns.iter().filter(|c| c.role == ColumnRole::Feature)
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("row {row}: expected {expected} cells, found {got}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("declared column '{name}' not present in the header")]
    MissingColumn { name: String },
    #[error("role '{role}' declared for more than one column")]
    DuplicateRole { role: ColumnRole },
    #[error("unknown role name '{name}'")]
    UnknownRole { name: String },
    #[error("roles file line {line}: expected 'column=role', found '{text}'")]
    BadRoleLine { line: usize, text: String },
    #[error("empty cell (missing values are rejected, not imputed)")]
    MissingValue,
    #[error("column '{column}', row {row}: expected a number, found '{value}'")]
    NonNumericCell {
        column: String,
        row: usize,
        value: String,
    },
    #[error("column '{column}', row {row}: value '{value}' outside the declared categories")]
    UnknownCategory {
        column: String,
        row: usize,
        value: String,
    },
    #[error("column '{column}', row {row}: value {value} is not binary and no thresholds were declared")]
    NonBinaryColumn {
        column: String,
        row: usize,
        value: f64,
    },
    #[error("binarization spec: thresholds for '{column}' must be strictly increasing")]
    BadThresholds { column: String },
    #[error("binarization spec: categories for '{column}' contain duplicates")]
    DuplicateCategories { column: String },
    #[error("table has no rows")]
    EmptyTable,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Read comma-separated text with a header row and map columns to roles.
pub fn load_csv(reader: impl Read, decls: &RoleDecls) -> Result<RawTable, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let mut roles = vec![ColumnRole::Feature; headers.len()];
    let mut seen: Vec<ColumnRole> = Vec::new();
    for (name, role) in decls.pairs() {
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn { name: name.clone() })?;
        if role.unique() && seen.contains(role) {
            return Err(DataError::DuplicateRole { role: *role });
        }
        seen.push(*role);
        roles[idx] = *role;
    }

    let mut values: Vec<Vec<Cell>> = vec![Vec::new(); headers.len()];
    for (ri, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(DataError::RaggedRow {
                row: ri + 1,
                expected: headers.len(),
                got: record.len(),
            });
        }
        for (ci, cell) in record.iter().enumerate() {
            values[ci].push(Cell::parse(cell)?);
        }
    }
    let n_rows = values.first().map(|v| v.len()).unwrap_or(0);
    if n_rows == 0 {
        return Err(DataError::EmptyTable);
    }

    let columns = headers
        .into_iter()
        .zip(roles)
        .zip(values)
        .map(|((name, role), values)| RawColumn { name, role, values })
        .collect();
    Ok(RawTable { columns, n_rows })
}

/// [`load_csv`] from a file path.
pub fn load_csv_path(path: impl AsRef<Path>, decls: &RoleDecls) -> Result<RawTable, DataError> {
    let file = std::fs::File::open(path)?;
    load_csv(file, decls)
}

/// Per-column binarization recipe.
#[derive(Debug, Clone, Default)]
pub struct BinarizationSpec {
    /// Numeric columns: strictly increasing thresholds, one feature each.
    pub thresholds: BTreeMap<String, Vec<f64>>,
    /// Categorical columns: duplicate-free category list, one-hot expanded.
    pub categories: BTreeMap<String, Vec<String>>,
}

impl BinarizationSpec {
    /// Derive a default spec: binary numeric columns pass through, other
    /// numeric columns get midpoints between consecutive distinct values
    /// (thinned to at most `max_thresholds`), text columns get their sorted
    /// distinct values.
    pub fn infer(table: &RawTable, max_thresholds: usize) -> BinarizationSpec {
        let mut spec = BinarizationSpec::default();
        for col in table.feature_columns() {
            let all_numeric = col.values.iter().all(|c| matches!(c, Cell::Number(_)));
            if all_numeric {
                let binary = col
                    .values
                    .iter()
                    .all(|c| matches!(c, Cell::Number(v) if *v == 0.0 || *v == 1.0));
                if binary {
                    continue;
                }
                let mut distinct: Vec<f64> = col
                    .values
                    .iter()
                    .map(|c| match c {
                        Cell::Number(v) => *v,
                        Cell::Text(_) => unreachable!(),
                    })
                    .collect();
                distinct.sort_by(f64::total_cmp);
                distinct.dedup();
                let mids: Vec<f64> = distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
                spec.thresholds
                    .insert(col.name.clone(), thin_quantiles(&mids, max_thresholds));
            } else {
                let mut cats: Vec<String> = col.values.iter().map(Cell::canonical).collect();
                cats.sort();
                cats.dedup();
                spec.categories.insert(col.name.clone(), cats);
            }
        }
        spec
    }

    fn check(&self) -> Result<(), DataError> {
        for (col, ths) in &self.thresholds {
            if ths.windows(2).any(|w| w[0] >= w[1]) {
                return Err(DataError::BadThresholds { column: col.clone() });
            }
        }
        for (col, cats) in &self.categories {
            let mut sorted = cats.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != cats.len() {
                return Err(DataError::DuplicateCategories { column: col.clone() });
            }
        }
        Ok(())
    }
}

/// Keep at most `cap` values, spread across the sorted input by rank.
fn thin_quantiles(sorted: &[f64], cap: usize) -> Vec<f64> {
    if sorted.len() <= cap {
        return sorted.to_vec();
    }
    let mut out = Vec::with_capacity(cap);
    for j in 1..=cap {
        let idx = (j * sorted.len()) / (cap + 1);
        out.push(sorted[idx.min(sorted.len() - 1)]);
    }
    out.dedup();
    out
}

/// Dense-coded, fully binarized dataset ready for the fit pipelines.
#[derive(Debug, Clone)]
pub struct BinarizedDataset {
    /// n rows of F features, every entry 0 or 1.
    pub x: Vec<Vec<u8>>,
    pub feature_names: Vec<String>,
    /// Class labels, dense in `0..num_classes`.
    pub y: Option<Vec<usize>>,
    pub label_names: Vec<String>,
    /// Treatment codes, dense in `0..num_treatments`.
    pub treatment: Option<Vec<usize>>,
    pub treatment_names: Vec<String>,
    /// Real-valued outcomes for prescriptive tasks.
    pub outcome: Option<Vec<f64>>,
    /// Protected group codes.
    pub protected: Option<Vec<usize>>,
    pub protected_names: Vec<String>,
    /// Legitimate-factor codes (conditional statistical parity).
    pub legitimate: Option<Vec<usize>>,
    pub legitimate_names: Vec<String>,
    /// Per-sample nonnegative weights; all ones by default.
    pub weights: Vec<f64>,
}

impl BinarizedDataset {
    /// Bare classification dataset with synthetic names and unit weights.
    pub fn classification(x: Vec<Vec<u8>>, y: Vec<usize>) -> BinarizedDataset {
        let f = x.first().map(|r| r.len()).unwrap_or(0);
        let k = y.iter().copied().max().map(|m| m + 1).unwrap_or(0);
        let n = x.len();
        BinarizedDataset {
            x,
            feature_names: (0..f).map(|j| format!("f{j}")).collect(),
            y: Some(y),
            label_names: (0..k).map(|c| format!("{c}")).collect(),
            treatment: None,
            treatment_names: Vec::new(),
            outcome: None,
            protected: None,
            protected_names: Vec::new(),
            legitimate: None,
            legitimate_names: Vec::new(),
            weights: vec![1.0; n],
        }
    }

    /// Bare observational dataset (treatments + outcomes) with unit weights.
    pub fn observational(x: Vec<Vec<u8>>, treatment: Vec<usize>, outcome: Vec<f64>) -> BinarizedDataset {
        let f = x.first().map(|r| r.len()).unwrap_or(0);
        let k = treatment.iter().copied().max().map(|m| m + 1).unwrap_or(0);
        let n = x.len();
        BinarizedDataset {
            x,
            feature_names: (0..f).map(|j| format!("f{j}")).collect(),
            y: None,
            label_names: Vec::new(),
            treatment: Some(treatment),
            treatment_names: (0..k).map(|c| format!("{c}")).collect(),
            outcome: Some(outcome),
            protected: None,
            protected_names: Vec::new(),
            legitimate: None,
            legitimate_names: Vec::new(),
            weights: vec![1.0; n],
        }
    }

    pub fn with_protected(mut self, groups: Vec<usize>) -> BinarizedDataset {
        let g = groups.iter().copied().max().map(|m| m + 1).unwrap_or(0);
        self.protected_names = (0..g).map(|c| format!("g{c}")).collect();
        self.protected = Some(groups);
        self
    }

    pub fn with_legitimate(mut self, factor: Vec<usize>) -> BinarizedDataset {
        let l = factor.iter().copied().max().map(|m| m + 1).unwrap_or(0);
        self.legitimate_names = (0..l).map(|c| format!("l{c}")).collect();
        self.legitimate = Some(factor);
        self
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> BinarizedDataset {
        self.weights = weights;
        self
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn num_treatments(&self) -> usize {
        self.treatment_names.len()
    }
}

/// Encode a column of arbitrary cells as dense codes. Numeric-only columns
/// sort numerically; anything else sorts lexicographically.
fn encode_dense(values: &[Cell]) -> (Vec<usize>, Vec<String>) {
    let all_numeric = values.iter().all(|c| matches!(c, Cell::Number(_)));
    let mut names: Vec<String> = if all_numeric {
        let mut nums: Vec<f64> = values
            .iter()
            .map(|c| match c {
                Cell::Number(v) => *v,
                Cell::Text(_) => unreachable!(),
            })
            .collect();
        nums.sort_by(f64::total_cmp);
        nums.dedup();
        nums.into_iter().map(format_num).collect()
    } else {
        let mut keys: Vec<String> = values.iter().map(Cell::canonical).collect();
        keys.sort();
        keys.dedup();
        keys
    };
    names.shrink_to_fit();
    let codes = values
        .iter()
        .map(|c| {
            let key = c.canonical();
            names.iter().position(|n| *n == key).expect("key present")
        })
        .collect();
    (codes, names)
}

/// Apply a binarization spec to a raw table.
///
/// Numeric column `c` with thresholds `t_1 < .. < t_m` becomes features
/// `c<=t_j` valued `1` iff the cell is `<= t_j` (monotone nondecreasing in
/// `j` for a fixed row). Categorical columns one-hot expand over their
/// declared category list. Binary numeric columns pass through.
pub fn binarize(table: &RawTable, spec: &BinarizationSpec) -> Result<BinarizedDataset, DataError> {
    spec.check()?;
    let n = table.n_rows();
    let mut x: Vec<Vec<u8>> = vec![Vec::new(); n];
    let mut feature_names = Vec::new();

    for col in table.feature_columns() {
        if let Some(ths) = spec.thresholds.get(&col.name) {
            for &th in ths {
                feature_names.push(format!("{}<={}", col.name, format_num(th)));
            }
            for (ri, cell) in col.values.iter().enumerate() {
                let v = match cell {
                    Cell::Number(v) => *v,
                    Cell::Text(s) => {
                        return Err(DataError::NonNumericCell {
                            column: col.name.clone(),
                            row: ri + 1,
                            value: s.clone(),
                        })
                    }
                };
                for &th in ths {
                    x[ri].push(u8::from(v <= th));
                }
            }
        } else if let Some(cats) = spec.categories.get(&col.name) {
            for cat in cats {
                feature_names.push(format!("{}={}", col.name, cat));
            }
            for (ri, cell) in col.values.iter().enumerate() {
                let key = cell.canonical();
                let hit = cats.iter().position(|c| *c == key);
                match hit {
                    Some(idx) => {
                        for (ci, _) in cats.iter().enumerate() {
                            x[ri].push(u8::from(ci == idx));
                        }
                    }
                    None => {
                        return Err(DataError::UnknownCategory {
                            column: col.name.clone(),
                            row: ri + 1,
                            value: key,
                        })
                    }
                }
            }
        } else {
            feature_names.push(col.name.clone());
            for (ri, cell) in col.values.iter().enumerate() {
                match cell {
                    Cell::Number(v) if *v == 0.0 || *v == 1.0 => x[ri].push(*v as u8),
                    Cell::Number(v) => {
                        return Err(DataError::NonBinaryColumn {
                            column: col.name.clone(),
                            row: ri + 1,
                            value: *v,
                        })
                    }
                    Cell::Text(s) => {
                        return Err(DataError::NonNumericCell {
                            column: col.name.clone(),
                            row: ri + 1,
                            value: s.clone(),
                        })
                    }
                }
            }
        }
    }

    let (y, label_names) = match table.column(ColumnRole::Label) {
        Some(col) => {
            let (codes, names) = encode_dense(&col.values);
            (Some(codes), names)
        }
        None => (None, Vec::new()),
    };
    let (treatment, treatment_names) = match table.column(ColumnRole::Treatment) {
        Some(col) => {
            let (codes, names) = encode_dense(&col.values);
            (Some(codes), names)
        }
        None => (None, Vec::new()),
    };
    let outcome = match table.column(ColumnRole::Outcome) {
        Some(col) => {
            let mut out = Vec::with_capacity(n);
            for (ri, cell) in col.values.iter().enumerate() {
                match cell {
                    Cell::Number(v) => out.push(*v),
                    Cell::Text(s) => {
                        return Err(DataError::NonNumericCell {
                            column: col.name.clone(),
                            row: ri + 1,
                            value: s.clone(),
                        })
                    }
                }
            }
            Some(out)
        }
        None => None,
    };
    let (protected, protected_names) = match table.column(ColumnRole::Protected) {
        Some(col) => {
            let (codes, names) = encode_dense(&col.values);
            (Some(codes), names)
        }
        None => (None, Vec::new()),
    };
    let (legitimate, legitimate_names) = match table.column(ColumnRole::Legitimate) {
        Some(col) => {
            let (codes, names) = encode_dense(&col.values);
            (Some(codes), names)
        }
        None => (None, Vec::new()),
    };

    Ok(BinarizedDataset {
        x,
        feature_names,
        y,
        label_names,
        treatment,
        treatment_names,
        outcome,
        protected,
        protected_names,
        legitimate,
        legitimate_names,
        weights: vec![1.0; n],
    })
}

/// Task whose input requirements are being checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classification,
    Fair,
    Robust,
    Policy,
}

/// One validation finding; an empty list from [`validate`] means the dataset
/// satisfies everything the task needs.
#[derive(Debug, Clone, PartialEq)]
pub enum DataDiagnostic {
    MissingField(&'static str),
    NonBinaryFeature { row: usize, col: usize, value: u8 },
    RaggedFeatureRow { row: usize, expected: usize, got: usize },
    NotDense { field: &'static str, code: usize },
    TooFewClasses { field: &'static str, count: usize },
    EmptyArm { arm: usize },
    BadWeight { row: usize, value: f64 },
    NonFiniteOutcome { row: usize },
    LengthMismatch { field: &'static str, expected: usize, got: usize },
}

impl fmt::Display for DataDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataDiagnostic::MissingField(name) => write!(f, "missing {name}"),
            DataDiagnostic::NonBinaryFeature { row, col, value } => {
                write!(f, "non-binary feature at row {row}, column {col}: {value}")
            }
            DataDiagnostic::RaggedFeatureRow { row, expected, got } => {
                write!(f, "row {row} has {got} features, expected {expected}")
            }
            DataDiagnostic::NotDense { field, code } => {
                write!(f, "{field} codes are not dense: code {code} unused")
            }
            DataDiagnostic::TooFewClasses { field, count } => {
                write!(f, "{field} needs at least 2 distinct values, found {count}")
            }
            DataDiagnostic::EmptyArm { arm } => write!(f, "treatment arm {arm} has no samples"),
            DataDiagnostic::BadWeight { row, value } => {
                write!(f, "weight at row {row} is invalid: {value}")
            }
            DataDiagnostic::NonFiniteOutcome { row } => {
                write!(f, "outcome at row {row} is not finite")
            }
            DataDiagnostic::LengthMismatch { field, expected, got } => {
                write!(f, "{field} has {got} entries, expected {expected}")
            }
        }
    }
}

fn check_dense(codes: &[usize], field: &'static str, out: &mut Vec<DataDiagnostic>) -> usize {
    let k = codes.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    let mut seen = vec![false; k];
    for &c in codes {
        seen[c] = true;
    }
    for (code, present) in seen.iter().enumerate() {
        if !present {
            out.push(DataDiagnostic::NotDense { field, code });
        }
    }
    k
}

/// Check that the dataset carries everything `task` requires.
pub fn validate(dataset: &BinarizedDataset, task: Task) -> Vec<DataDiagnostic> {
    let mut out = Vec::new();
    let n = dataset.n();
    let f = dataset.num_features();

    for (ri, row) in dataset.x.iter().enumerate() {
        if row.len() != f {
            out.push(DataDiagnostic::RaggedFeatureRow {
                row: ri,
                expected: f,
                got: row.len(),
            });
            continue;
        }
        for (ci, &v) in row.iter().enumerate() {
            if v > 1 {
                out.push(DataDiagnostic::NonBinaryFeature {
                    row: ri,
                    col: ci,
                    value: v,
                });
            }
        }
    }

    if dataset.weights.len() != n {
        out.push(DataDiagnostic::LengthMismatch {
            field: "weights",
            expected: n,
            got: dataset.weights.len(),
        });
    } else {
        for (ri, &w) in dataset.weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                out.push(DataDiagnostic::BadWeight { row: ri, value: w });
            }
        }
    }

    let needs_labels = matches!(task, Task::Classification | Task::Fair | Task::Robust);
    if needs_labels {
        match &dataset.y {
            None => out.push(DataDiagnostic::MissingField("labels")),
            Some(y) => {
                if y.len() != n {
                    out.push(DataDiagnostic::LengthMismatch {
                        field: "labels",
                        expected: n,
                        got: y.len(),
                    });
                } else {
                    let observed = check_dense(y, "label", &mut out);
                    // Declared classes may exceed the observed codes (names
                    // list is authoritative) but never the other way around.
                    let declared = dataset.label_names.len().max(observed);
                    if observed > dataset.label_names.len() && !dataset.label_names.is_empty() {
                        out.push(DataDiagnostic::LengthMismatch {
                            field: "label names",
                            expected: observed,
                            got: dataset.label_names.len(),
                        });
                    }
                    if declared < 2 {
                        out.push(DataDiagnostic::TooFewClasses {
                            field: "label",
                            count: declared,
                        });
                    }
                }
            }
        }
    }

    if task == Task::Fair {
        match &dataset.protected {
            None => out.push(DataDiagnostic::MissingField("protected attribute")),
            Some(g) => {
                if g.len() != n {
                    out.push(DataDiagnostic::LengthMismatch {
                        field: "protected attribute",
                        expected: n,
                        got: g.len(),
                    });
                } else {
                    check_dense(g, "protected group", &mut out);
                }
            }
        }
        if let Some(l) = &dataset.legitimate {
            if l.len() != n {
                out.push(DataDiagnostic::LengthMismatch {
                    field: "legitimate factor",
                    expected: n,
                    got: l.len(),
                });
            } else {
                check_dense(l, "legitimate factor", &mut out);
            }
        }
    }

    if task == Task::Policy {
        match &dataset.treatment {
            None => out.push(DataDiagnostic::MissingField("treatment column")),
            Some(t) => {
                if t.len() != n {
                    out.push(DataDiagnostic::LengthMismatch {
                        field: "treatments",
                        expected: n,
                        got: t.len(),
                    });
                } else {
                    let k = check_dense(t, "treatment", &mut out);
                    if k < 2 {
                        out.push(DataDiagnostic::TooFewClasses {
                            field: "treatment",
                            count: k,
                        });
                    }
                    for arm in 0..k {
                        if !t.contains(&arm) {
                            out.push(DataDiagnostic::EmptyArm { arm });
                        }
                    }
                }
            }
        }
        match &dataset.outcome {
            None => out.push(DataDiagnostic::MissingField("outcome column")),
            Some(ys) => {
                if ys.len() != n {
                    out.push(DataDiagnostic::LengthMismatch {
                        field: "outcomes",
                        expected: n,
                        got: ys.len(),
                    });
                } else {
                    for (ri, v) in ys.iter().enumerate() {
                        if !v.is_finite() {
                            out.push(DataDiagnostic::NonFiniteOutcome { row: ri });
                        }
                    }
                }
            }
        }
    }

    out
}
