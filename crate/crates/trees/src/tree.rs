//! Complete-binary-tree topology, the learned-tree data model, routing, and
//! DOT / JSON emission.
//!
//! Nodes use heap-style 1-based indexing: node `n` has children `2n` and
//! `2n+1`, so parent/child arithmetic needs no stored pointers. A tree of
//! depth `d` has branch candidates `1..2^d - 1` and leaves `2^d..2^(d+1) - 1`.
//! "Pruned" is an explicit role so that positional extraction from the
//! optimization variables stays trivial.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complete binary tree shape of a given depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    depth: u32,
}

impl Topology {
    pub fn new(depth: u32) -> Topology {
        assert!((1..=16).contains(&depth), "depth must be in 1..=16");
        Topology { depth }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Total node count `2^(d+1) - 1`.
    pub fn num_nodes(&self) -> usize {
        (1usize << (self.depth + 1)) - 1
    }

    /// Branch candidate set `1..2^d - 1` (inclusive).
    pub fn branch_nodes(&self) -> impl Iterator<Item = usize> {
        1..(1usize << self.depth)
    }

    pub fn num_branch_nodes(&self) -> usize {
        (1usize << self.depth) - 1
    }

    /// Leaf set `2^d..2^(d+1) - 1` (inclusive).
    pub fn leaf_nodes(&self) -> impl Iterator<Item = usize> {
        (1usize << self.depth)..(1usize << (self.depth + 1))
    }

    pub fn all_nodes(&self) -> impl Iterator<Item = usize> {
        1..=self.num_nodes()
    }

    pub fn is_branch_node(&self, n: usize) -> bool {
        n >= 1 && n < (1usize << self.depth)
    }

    pub fn is_leaf(&self, n: usize) -> bool {
        n >= (1usize << self.depth) && n <= self.num_nodes()
    }

    pub fn parent(&self, n: usize) -> Option<usize> {
        if n <= 1 {
            None
        } else {
            Some(n / 2)
        }
    }

    pub fn left(&self, n: usize) -> usize {
        2 * n
    }

    pub fn right(&self, n: usize) -> usize {
        2 * n + 1
    }

    /// Ancestor chain of `n`, nearest first; empty for the root.
    pub fn ancestors(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = n;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out
    }
}

/// Role of one node in a learned tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    /// Test the given feature: left child on 0, right child on 1.
    Branch(usize),
    /// Terminate routing with the given label (or treatment) code.
    Predict(usize),
    /// Inert node below a prediction.
    Pruned,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("node {node}: branch role outside the branch set")]
    BranchAtLeaf { node: usize },
    #[error("node {node}: routing reached a pruned node")]
    ReachedPruned { node: usize },
    #[error("node {node}: descendant of a prediction is not pruned")]
    LiveBelowPredict { node: usize },
    #[error("root must branch or predict")]
    RootPruned,
    #[error("plan stores {got} roles, expected {expected} for depth {depth}")]
    WrongNodeCount {
        depth: u32,
        expected: usize,
        got: usize,
    },
    #[error("node {node}: branch feature {feature} out of range for {width} features")]
    FeatureOutOfRange {
        node: usize,
        feature: usize,
        width: usize,
    },
    #[error("missing {kind} name for index {index}")]
    MissingName { kind: &'static str, index: usize },
    #[error("tree JSON: {0}")]
    Json(String),
}

/// A learned decision tree over the complete topology of its depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePlan {
    depth: u32,
    roles: Vec<NodeRole>,
}

impl TreePlan {
    /// Build a plan from per-node roles (index 0 is node 1) and check the
    /// structural invariants.
    pub fn new(depth: u32, roles: Vec<NodeRole>) -> Result<TreePlan, PlanError> {
        let topo = Topology::new(depth);
        if roles.len() != topo.num_nodes() {
            return Err(PlanError::WrongNodeCount {
                depth,
                expected: topo.num_nodes(),
                got: roles.len(),
            });
        }
        let plan = TreePlan { depth, roles };
        plan.check(&topo, 1)?;
        Ok(plan)
    }

    /// Plan predicting a single label at the root.
    pub fn constant(depth: u32, label: usize) -> TreePlan {
        let topo = Topology::new(depth);
        let mut roles = vec![NodeRole::Pruned; topo.num_nodes()];
        roles[0] = NodeRole::Predict(label);
        TreePlan { depth, roles }
    }

    fn check(&self, topo: &Topology, node: usize) -> Result<(), PlanError> {
        match self.role(node) {
            NodeRole::Branch(_) => {
                if !topo.is_branch_node(node) {
                    return Err(PlanError::BranchAtLeaf { node });
                }
                for child in [topo.left(node), topo.right(node)] {
                    if self.role(child) == NodeRole::Pruned {
                        return Err(PlanError::ReachedPruned { node: child });
                    }
                    self.check(topo, child)?;
                }
                Ok(())
            }
            NodeRole::Predict(_) => self.check_all_pruned_below(topo, node),
            NodeRole::Pruned => Err(if node == 1 {
                PlanError::RootPruned
            } else {
                PlanError::ReachedPruned { node }
            }),
        }
    }

    fn check_all_pruned_below(&self, topo: &Topology, node: usize) -> Result<(), PlanError> {
        if !topo.is_branch_node(node) {
            return Ok(());
        }
        for child in [topo.left(node), topo.right(node)] {
            if self.role(child) != NodeRole::Pruned {
                return Err(PlanError::LiveBelowPredict { node: child });
            }
            self.check_all_pruned_below(topo, child)?;
        }
        Ok(())
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn topology(&self) -> Topology {
        Topology::new(self.depth)
    }

    #[inline]
    pub fn role(&self, node: usize) -> NodeRole {
        self.roles[node - 1]
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    /// Number of branch nodes actually used.
    pub fn branch_count(&self) -> usize {
        self.roles
            .iter()
            .filter(|r| matches!(r, NodeRole::Branch(_)))
            .count()
    }

    /// Largest feature index referenced by a branch, if any.
    pub fn max_feature(&self) -> Option<usize> {
        self.roles
            .iter()
            .filter_map(|r| match r {
                NodeRole::Branch(f) => Some(*f),
                _ => None,
            })
            .max()
    }

    /// Largest label index referenced by a prediction.
    pub fn max_label(&self) -> Option<usize> {
        self.roles
            .iter()
            .filter_map(|r| match r {
                NodeRole::Predict(k) => Some(*k),
                _ => None,
            })
            .max()
    }

    /// Node sequence from the root to the prediction reached by `x`
    /// (left on 0, right on 1 at every branch).
    pub fn route(&self, x: &[u8]) -> Result<Vec<usize>, PlanError> {
        let mut node = 1usize;
        let mut path = Vec::with_capacity(self.depth as usize + 1);
        loop {
            path.push(node);
            match self.role(node) {
                NodeRole::Predict(_) => return Ok(path),
                NodeRole::Pruned => return Err(PlanError::ReachedPruned { node }),
                NodeRole::Branch(f) => {
                    if f >= x.len() {
                        return Err(PlanError::FeatureOutOfRange {
                            node,
                            feature: f,
                            width: x.len(),
                        });
                    }
                    node = 2 * node + usize::from(x[f] != 0);
                }
            }
        }
    }

    /// Predicted label for one row.
    pub fn predict_row(&self, x: &[u8]) -> Result<usize, PlanError> {
        let path = self.route(x)?;
        match self.role(*path.last().expect("route is never empty")) {
            NodeRole::Predict(k) => Ok(k),
            _ => unreachable!("route ends at a prediction"),
        }
    }

    /// Predicted labels for a whole matrix.
    pub fn predict(&self, x: &[Vec<u8>]) -> Result<Vec<usize>, PlanError> {
        x.iter().map(|row| self.predict_row(row)).collect()
    }

    /// DOT digraph with feature names on branch nodes, label names on
    /// prediction nodes, and 0/1 edge labels. Pruned nodes are omitted.
    /// Output is byte-deterministic for a given plan.
    pub fn to_dot(
        &self,
        feature_names: &[String],
        label_names: &[String],
    ) -> Result<String, PlanError> {
        let topo = self.topology();
        let mut out = String::from("digraph tree {\n    node [shape=box];\n");
        for n in topo.all_nodes() {
            match self.role(n) {
                NodeRole::Branch(f) => {
                    let name = feature_names.get(f).ok_or(PlanError::MissingName {
                        kind: "feature",
                        index: f,
                    })?;
                    out.push_str(&format!("    n{} [label=\"{}\"];\n", n, escape(name)));
                }
                NodeRole::Predict(k) => {
                    let name = label_names.get(k).ok_or(PlanError::MissingName {
                        kind: "label",
                        index: k,
                    })?;
                    out.push_str(&format!("    n{} [label=\"{}\"];\n", n, escape(name)));
                }
                NodeRole::Pruned => {}
            }
        }
        for n in topo.all_nodes() {
            if let NodeRole::Branch(_) = self.role(n) {
                out.push_str(&format!("    n{} -> n{} [label=\"0\"];\n", n, topo.left(n)));
                out.push_str(&format!("    n{} -> n{} [label=\"1\"];\n", n, topo.right(n)));
            }
        }
        out.push_str("}\n");
        Ok(out)
    }

    pub fn to_json_string(&self) -> String {
        let doc = TreeJson::from(self);
        let mut s = serde_json::to_string_pretty(&doc).expect("tree serialization");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<TreePlan, PlanError> {
        let doc: TreeJson = serde_json::from_str(text).map_err(|e| PlanError::Json(e.to_string()))?;
        doc.into_plan()
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// On-disk JSON schema: `{"depth": d, "nodes": [{"id", "role", "feature"?,
/// "label"?}]}` with every node of the complete tree listed.
#[derive(Debug, Serialize, Deserialize)]
struct TreeJson {
    depth: u32,
    nodes: Vec<NodeJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    role: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    feature: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<usize>,
}

impl From<&TreePlan> for TreeJson {
    fn from(plan: &TreePlan) -> TreeJson {
        let nodes = plan
            .topology()
            .all_nodes()
            .map(|n| match plan.role(n) {
                NodeRole::Branch(f) => NodeJson {
                    id: n,
                    role: "branch".to_string(),
                    feature: Some(f),
                    label: None,
                },
                NodeRole::Predict(k) => NodeJson {
                    id: n,
                    role: "predict".to_string(),
                    feature: None,
                    label: Some(k),
                },
                NodeRole::Pruned => NodeJson {
                    id: n,
                    role: "pruned".to_string(),
                    feature: None,
                    label: None,
                },
            })
            .collect();
        TreeJson {
            depth: plan.depth,
            nodes,
        }
    }
}

impl TreeJson {
    fn into_plan(self) -> Result<TreePlan, PlanError> {
        if self.depth == 0 || self.depth > 16 {
            return Err(PlanError::Json(format!("bad depth {}", self.depth)));
        }
        let count = (1usize << (self.depth + 1)) - 1;
        let mut roles = vec![None; count];
        for node in &self.nodes {
            if node.id == 0 || node.id > count {
                return Err(PlanError::Json(format!("node id {} out of range", node.id)));
            }
            if roles[node.id - 1].is_some() {
                return Err(PlanError::Json(format!("duplicate node id {}", node.id)));
            }
            let role = match node.role.as_str() {
                "branch" => NodeRole::Branch(node.feature.ok_or_else(|| {
                    PlanError::Json(format!("branch node {} missing feature", node.id))
                })?),
                "predict" => NodeRole::Predict(node.label.ok_or_else(|| {
                    PlanError::Json(format!("predict node {} missing label", node.id))
                })?),
                "pruned" => NodeRole::Pruned,
                other => {
                    return Err(PlanError::Json(format!(
                        "node {}: unknown role '{other}'",
                        node.id
                    )))
                }
            };
            roles[node.id - 1] = Some(role);
        }
        let roles: Vec<NodeRole> = roles
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or(PlanError::Json(format!("missing node id {}", i + 1))))
            .collect::<Result<_, _>>()?;
        TreePlan::new(self.depth, roles)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn depth1_plan(f: usize, left: usize, right: usize) -> TreePlan {
        TreePlan::new(
            1,
            vec![
                NodeRole::Branch(f),
                NodeRole::Predict(left),
                NodeRole::Predict(right),
            ],
        )
        .unwrap()
    }

    /// Depth-2 plan that classifies the exclusive-or of two bits.
    pub(crate) fn xor_plan() -> TreePlan {
        TreePlan::new(
            2,
            vec![
                NodeRole::Branch(0),
                NodeRole::Branch(1),
                NodeRole::Branch(1),
                NodeRole::Predict(0),
                NodeRole::Predict(1),
                NodeRole::Predict(1),
                NodeRole::Predict(0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn route_takes_right_child_on_one() {
        let plan = depth1_plan(0, 0, 1);
        assert_eq!(plan.route(&[1, 0]).unwrap(), vec![1, 3]);
        assert_eq!(plan.route(&[0, 0]).unwrap(), vec![1, 2]);
    }

    #[test]
    fn root_prediction_routes_to_single_node() {
        let plan = TreePlan::constant(1, 1);
        assert_eq!(plan.route(&[0]).unwrap(), vec![1]);
        assert_eq!(plan.route(&[1]).unwrap(), vec![1]);
    }

    #[test]
    fn xor_plan_predicts_all_four_points() {
        let plan = xor_plan();
        let x = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        assert_eq!(plan.predict(&x).unwrap(), vec![0, 1, 1, 0]);
    }

    #[test]
    fn constant_plan_predicts_everything_one() {
        let plan = TreePlan::constant(2, 1);
        let x = vec![vec![0, 0], vec![1, 1], vec![0, 1]];
        assert_eq!(plan.predict(&x).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn single_feature_branch_maps_bit_to_label() {
        let plan = depth1_plan(1, 0, 1);
        let x = vec![vec![9, 0], vec![9, 1]];
        // Feature values other than 0 route right; only 0/1 appear in practice.
        assert_eq!(plan.predict(&x).unwrap(), vec![0, 1]);
    }

    #[test]
    fn invariants_reject_bad_plans() {
        // Pruned root.
        assert_eq!(
            TreePlan::new(1, vec![NodeRole::Pruned, NodeRole::Pruned, NodeRole::Pruned]),
            Err(PlanError::RootPruned)
        );
        // Branch child pruned: no prediction on that path.
        assert!(TreePlan::new(
            1,
            vec![NodeRole::Branch(0), NodeRole::Predict(0), NodeRole::Pruned]
        )
        .is_err());
        // Live node below a prediction.
        assert!(TreePlan::new(
            2,
            vec![
                NodeRole::Predict(0),
                NodeRole::Predict(1),
                NodeRole::Pruned,
                NodeRole::Pruned,
                NodeRole::Pruned,
                NodeRole::Pruned,
                NodeRole::Pruned,
            ]
        )
        .is_err());
    }

    #[test]
    fn feature_out_of_range_is_reported() {
        let plan = depth1_plan(9, 0, 1);
        assert!(matches!(
            plan.route(&[0, 1]),
            Err(PlanError::FeatureOutOfRange { feature: 9, .. })
        ));
    }

    #[test]
    fn dot_for_single_prediction() {
        let plan = TreePlan::constant(1, 1);
        let dot = plan
            .to_dot(&[], &["neg".to_string(), "pos".to_string()])
            .unwrap();
        assert_eq!(
            dot,
            "digraph tree {\n    node [shape=box];\n    n1 [label=\"pos\"];\n}\n"
        );
    }

    #[test]
    fn dot_for_depth1_branch_has_three_nodes_two_edges() {
        let plan = depth1_plan(0, 0, 1);
        let dot = plan
            .to_dot(
                &["age<=30".to_string()],
                &["no".to_string(), "yes".to_string()],
            )
            .unwrap();
        assert_eq!(dot.matches("label=").count(), 5); // 3 nodes + 2 edges
        assert!(dot.contains("n1 [label=\"age<=30\"];"));
        assert!(dot.contains("n1 -> n2 [label=\"0\"];"));
        assert!(dot.contains("n1 -> n3 [label=\"1\"];"));
    }

    #[test]
    fn json_roundtrip_preserves_plan() {
        let plan = xor_plan();
        let text = plan.to_json_string();
        let back = TreePlan::from_json_str(&text).unwrap();
        assert_eq!(plan, back);
    }

    #[test]
    fn json_rejects_malformed_documents() {
        assert!(TreePlan::from_json_str("{").is_err());
        assert!(TreePlan::from_json_str("{\"depth\":1,\"nodes\":[]}").is_err());
        let missing_feature =
            "{\"depth\":1,\"nodes\":[{\"id\":1,\"role\":\"branch\"},{\"id\":2,\"role\":\"predict\",\"label\":0},{\"id\":3,\"role\":\"predict\",\"label\":0}]}";
        assert!(TreePlan::from_json_str(missing_feature).is_err());
    }

    #[test]
    fn predictions_ignore_pruned_subtree_contents() {
        // Same predictions whether the area below the predict node is pruned
        // in one arrangement or another (it is always fully pruned by the
        // invariants, so equality with the constant plan is the check).
        let a = TreePlan::constant(2, 1);
        let x = vec![vec![0, 0], vec![1, 0]];
        assert_eq!(a.predict(&x).unwrap(), vec![1, 1]);
    }
}
