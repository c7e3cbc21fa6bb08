//! DOT and JSON rendering of the unification tree.
//!
//! Node ids are path strings; labels carry the node's equations and the
//! measure triple; edges carry the step label. Output is deterministic for
//! a fixed input.

use serde::{Deserialize, Serialize};

use super::{NodeStatus, SearchTree, StepLabel, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

/// Renders a tree in the requested format.
pub fn export_tree(tree: &SearchTree, format: ExportFormat) -> String {
    match format {
        ExportFormat::Dot => to_dot(tree),
        ExportFormat::Json => {
            serde_json::to_string_pretty(&JsonNode::from_tree_node(&tree.root, "root"))
                .expect("tree serialization cannot fail")
        }
    }
}

fn equations_label(node: &TreeNode) -> String {
    if node.problem.equations.is_empty() {
        String::from("(empty)")
    } else {
        node.problem
            .equations
            .iter()
            .map(|eq| eq.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn status_label(status: &NodeStatus) -> String {
    match status {
        NodeStatus::Internal => "internal".to_string(),
        NodeStatus::Success => "success".to_string(),
        NodeStatus::Failure(cause) => format!("failure:{cause}"),
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn to_dot(tree: &SearchTree) -> String {
    let mut out = String::from("digraph unification {\n");
    out.push_str("  node [shape=box];\n");
    write_dot_node(&tree.root, "root", &mut out);
    out.push_str("}\n");
    out
}

fn write_dot_node(node: &TreeNode, id: &str, out: &mut String) {
    let mut parts = vec![equations_label(node), node.measure.to_string()];
    if !matches!(node.status, NodeStatus::Internal) {
        parts.push(status_label(&node.status));
    }
    let label = parts
        .iter()
        .map(|p| dot_escape(p))
        .collect::<Vec<_>>()
        .join("\\n");
    out.push_str(&format!(
        "  \"{}\" [label=\"{}\"];\n",
        dot_escape(id),
        label
    ));
    for child in &node.children {
        let step = child
            .step
            .as_ref()
            .map(StepLabel::to_string)
            .unwrap_or_default();
        let child_id = format!("{id}/{step}");
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            dot_escape(id),
            dot_escape(&child_id),
            dot_escape(&step)
        ));
        write_dot_node(child, &child_id, out);
    }
}

/// The JSON tree schema: `{id, label, measure: [v, w, s], step, children,
/// status}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonNode {
    pub id: String,
    pub label: String,
    pub measure: [usize; 3],
    pub step: Option<String>,
    pub children: Vec<JsonNode>,
    pub status: String,
}

impl JsonNode {
    fn from_tree_node(node: &TreeNode, id: &str) -> JsonNode {
        let children = node
            .children
            .iter()
            .map(|child| {
                let step = child
                    .step
                    .as_ref()
                    .map(StepLabel::to_string)
                    .unwrap_or_default();
                JsonNode::from_tree_node(child, &format!("{id}/{step}"))
            })
            .collect();
        JsonNode {
            id: id.to_string(),
            label: equations_label(node),
            measure: [node.measure.v, node.measure.w, node.measure.s],
            step: node.step.as_ref().map(StepLabel::to_string),
            children,
            status: status_label(&node.status),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(JsonNode::node_count)
            .sum::<usize>()
    }
}
