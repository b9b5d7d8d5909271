//! Run manifest: a machine-readable record that fully reconstructs a fit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub task: String,
    pub data: DataSection,
    pub config: ConfigSection,
    pub result: ResultSection,
    /// Predicted codes on the training data, for round-trip checks.
    pub training_predictions: Vec<usize>,
    /// Inline copy of tree.json.
    pub tree: Value,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DataSection {
    pub path: String,
    pub rows: usize,
    pub features: usize,
    pub feature_names: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub classes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub treatments: Vec<String>,
    /// Thresholds per source column used during binarization.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub thresholds: BTreeMap<String, Vec<f64>>,
    /// One-hot category lists per source column.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub categories: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConfigSection {
    pub depth: u32,
    pub lambda: f64,
    pub objective: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fairness: Option<FairnessSection>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub robust: Option<RobustSection>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub policy: Option<PolicySection>,
    pub solver: SolverSection,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FairnessSection {
    #[serde(rename = "type")]
    pub kind: String,
    pub bound: f64,
    pub positive_class: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RobustSection {
    pub costs: String,
    pub epsilon: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PolicySection {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scores: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    pub budgets: BTreeMap<String, u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolverSection {
    pub gap_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub time_limit: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultSection {
    pub status: String,
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes_explored: usize,
    /// Mixed-integer solves performed (cut loops solve more than once).
    pub solves: usize,
    pub wall_time_seconds: f64,
    pub limited: bool,
}

impl RunManifest {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialization");
        s.push('\n');
        s
    }
}
