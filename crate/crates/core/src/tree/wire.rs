//! JSON wire format for trees.
//!
//! This is what server and clients exchange. A tree is a flat node list:
//!
//! ```json
//! {"nodes":[
//!   {"id":0,"kind":"split","feature":3,"threshold":2.5,"children":[1,2]},
//!   {"id":1,"kind":"leaf","label_list":[0,2]},
//!   {"id":2,"kind":"leaf"}
//! ]}
//! ```
//!
//! Leaves of payload-free trees carry no data field at all, which is what
//! the growth-phase privacy audit checks for.

use serde::{Deserialize, Serialize};

use super::{DecisionTree, Node, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Split,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireNode {
    pub id: usize,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

impl WireNode {
    fn leaf(id: usize) -> Self {
        Self {
            id,
            kind: NodeKind::Leaf,
            feature: None,
            threshold: None,
            children: None,
            label_list: None,
            probabilities: None,
        }
    }

    /// True when this is a leaf that carries any label information.
    pub fn has_leaf_payload(&self) -> bool {
        self.kind == NodeKind::Leaf && (self.label_list.is_some() || self.probabilities.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireTree {
    pub nodes: Vec<WireNode>,
}

/// Leaf payloads that know how to put themselves on the wire.
pub trait LeafPayload: Sized {
    fn write(&self, node: &mut WireNode);
    fn read(node: &WireNode) -> Result<Self>;
}

impl LeafPayload for () {
    fn write(&self, _node: &mut WireNode) {}

    fn read(node: &WireNode) -> Result<Self> {
        if node.has_leaf_payload() {
            return Err(Error::Wire(format!("leaf {} carries a payload", node.id)));
        }
        Ok(())
    }
}

impl LeafPayload for Vec<usize> {
    fn write(&self, node: &mut WireNode) {
        node.label_list = Some(self.clone());
    }

    fn read(node: &WireNode) -> Result<Self> {
        node.label_list
            .clone()
            .ok_or_else(|| Error::Wire(format!("leaf {} has no label_list", node.id)))
    }
}

impl LeafPayload for Vec<f64> {
    fn write(&self, node: &mut WireNode) {
        node.probabilities = Some(self.clone());
    }

    fn read(node: &WireNode) -> Result<Self> {
        node.probabilities
            .clone()
            .ok_or_else(|| Error::Wire(format!("leaf {} has no probabilities", node.id)))
    }
}

impl<L: LeafPayload> DecisionTree<L> {
    pub fn to_wire(&self) -> WireTree {
        let nodes = self
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, node)| match node {
                Node::Internal(s) => WireNode {
                    kind: NodeKind::Split,
                    feature: Some(s.feature),
                    threshold: Some(s.threshold),
                    children: Some([s.left, s.right]),
                    ..WireNode::leaf(id)
                },
                Node::Leaf(payload) => {
                    let mut w = WireNode::leaf(id);
                    payload.write(&mut w);
                    w
                }
            })
            .collect();
        WireTree { nodes }
    }

    /// Rebuild a tree, checking that the node list forms a single rooted
    /// binary tree with ids equal to positions.
    pub fn from_wire(wire: &WireTree) -> Result<Self> {
        let n = wire.nodes.len();
        if n == 0 {
            return Err(Error::Wire("tree has no nodes".into()));
        }
        let mut parents = vec![0usize; n];
        let mut nodes = Vec::with_capacity(n);
        for (pos, w) in wire.nodes.iter().enumerate() {
            if w.id != pos {
                return Err(Error::Wire(format!(
                    "node at position {pos} has id {}",
                    w.id
                )));
            }
            let node = match w.kind {
                NodeKind::Split => {
                    let (Some(feature), Some(threshold), Some([left, right])) =
                        (w.feature, w.threshold, w.children)
                    else {
                        return Err(Error::Wire(format!("split node {pos} is incomplete")));
                    };
                    for child in [left, right] {
                        if child == 0 || child >= n {
                            return Err(Error::Wire(format!(
                                "node {pos} has invalid child {child}"
                            )));
                        }
                        parents[child] += 1;
                    }
                    Node::Internal(Split {
                        feature,
                        threshold,
                        left,
                        right,
                    })
                }
                NodeKind::Leaf => Node::Leaf(L::read(w)?),
            };
            nodes.push(node);
        }
        if let Some(bad) = parents.iter().skip(1).position(|&p| p != 1) {
            return Err(Error::Wire(format!(
                "node {} does not have exactly one parent",
                bad + 1
            )));
        }
        let tree = DecisionTree::from_nodes(nodes);
        let mut reached = 0;
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            reached += 1;
            if reached > n {
                break;
            }
            if let Node::Internal(s) = tree.node(id) {
                stack.push(s.left);
                stack.push(s.right);
            }
        }
        if reached != n {
            return Err(Error::Wire("node list is not a single rooted tree".into()));
        }
        Ok(tree)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("tree wire format always serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_wire(&serde_json::from_str(json)?)
    }
}
