//! Binary decision trees stored as a node arena.
//!
//! A tree is generic over its leaf payload. Growth works on payload-free
//! trees (`DecisionTree<()>`), which is what travels between server and
//! clients while the structure is being built. Finished models map the
//! leaves to label lists (the collaborative forest) or class-probability
//! vectors (the baselines).

mod adjust;
mod grow;
mod split;
mod wire;

pub use adjust::{adjust_leaves, leaf_class_counts, majority_label, LeafAdjustment};
pub use grow::{grow, GrowthParams, GrowthReport};
pub use split::{best_split, entropy, SplitCandidate};
pub use wire::{LeafPayload, NodeKind, WireNode, WireTree};

use serde::{Deserialize, Serialize};

pub type NodeId = usize;

/// Per-leaf list of class labels, one entry per contributing client.
pub type LabelList = Vec<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: NodeId,
    pub right: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node<L> {
    Internal(Split),
    Leaf(L),
}

/// Arena-backed binary tree; node 0 is the root.
///
/// Samples with `value <= threshold` go left, everything else goes right.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree<L = ()> {
    nodes: Vec<Node<L>>,
}

impl<L: Default> Default for DecisionTree<L> {
    fn default() -> Self {
        Self::new()
    }
}

impl<L: Default> DecisionTree<L> {
    /// A tree with a single empty leaf as its root.
    pub fn new() -> Self {
        Self {
            nodes: vec![Node::Leaf(L::default())],
        }
    }

    /// Turn leaf `leaf` into a split with two fresh leaves. Returns the ids
    /// of the new (left, right) children.
    pub(crate) fn split_leaf(
        &mut self,
        leaf: NodeId,
        feature: usize,
        threshold: f64,
    ) -> (NodeId, NodeId) {
        debug_assert!(self.is_leaf(leaf));
        let left = self.nodes.len();
        let right = left + 1;
        self.nodes.push(Node::Leaf(L::default()));
        self.nodes.push(Node::Leaf(L::default()));
        self.nodes[leaf] = Node::Internal(Split {
            feature,
            threshold,
            left,
            right,
        });
        (left, right)
    }
}

impl<L> DecisionTree<L> {
    pub(crate) fn from_nodes(nodes: Vec<Node<L>>) -> Self {
        Self { nodes }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[Node<L>] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node<L> {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        matches!(self.nodes[id], Node::Leaf(_))
    }

    pub fn leaf(&self, id: NodeId) -> Option<&L> {
        match &self.nodes[id] {
            Node::Leaf(payload) => Some(payload),
            Node::Internal(_) => None,
        }
    }

    /// Leaf ids in ascending order.
    pub fn leaf_ids(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&i| self.is_leaf(i)).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }

    /// Follow the split rules from the root to a leaf.
    pub fn route(&self, sample: &[f64]) -> NodeId {
        let mut id = 0;
        while let Node::Internal(split) = &self.nodes[id] {
            id = if sample[split.feature] <= split.threshold {
                split.left
            } else {
                split.right
            };
        }
        id
    }

    /// Payload of the leaf `sample` lands in.
    pub fn leaf_for(&self, sample: &[f64]) -> &L {
        match &self.nodes[self.route(sample)] {
            Node::Leaf(payload) => payload,
            Node::Internal(_) => unreachable!("route always ends at a leaf"),
        }
    }

    /// Depth (edges from the root) of every node, indexed by node id.
    pub fn node_depths(&self) -> Vec<usize> {
        let mut depths = vec![0; self.nodes.len()];
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            if let Node::Internal(s) = &self.nodes[id] {
                depths[s.left] = depths[id] + 1;
                depths[s.right] = depths[id] + 1;
                stack.push(s.left);
                stack.push(s.right);
            }
        }
        depths
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        self.node_depths().into_iter().max().unwrap_or(0)
    }

    /// Same structure with every leaf payload replaced by `f(leaf_id, payload)`.
    pub fn map_leaves<M>(&self, mut f: impl FnMut(NodeId, &L) -> M) -> DecisionTree<M> {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, node)| match node {
                Node::Internal(split) => Node::Internal(*split),
                Node::Leaf(payload) => Node::Leaf(f(id, payload)),
            })
            .collect();
        DecisionTree { nodes }
    }

    /// Payload-free copy of the structure.
    pub fn structure(&self) -> DecisionTree<()> {
        self.map_leaves(|_, _| ())
    }

    /// The internal splits, indexed by node id.
    pub fn splits(&self) -> impl Iterator<Item = (NodeId, &Split)> {
        self.nodes.iter().enumerate().filter_map(|(id, n)| match n {
            Node::Internal(s) => Some((id, s)),
            Node::Leaf(_) => None,
        })
    }

    /// True when every split of `other` is present, unchanged and under the
    /// same node id, in `self`.
    pub fn extends(&self, other: &DecisionTree<impl Sized>) -> bool {
        other.nodes.len() <= self.nodes.len()
            && other.splits().all(|(id, s)| match &self.nodes[id] {
                Node::Internal(mine) => mine == s,
                Node::Leaf(_) => false,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_split() -> DecisionTree {
        let mut t = DecisionTree::new();
        t.split_leaf(0, 0, 2.5);
        t
    }

    #[test]
    fn single_leaf_routes_to_root() {
        let t: DecisionTree = DecisionTree::new();
        assert_eq!(t.route(&[123.0, -4.0]), 0);
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn boundary_goes_left() {
        let t = one_split();
        assert_eq!(t.route(&[2.5]), 1);
        assert_eq!(t.route(&[2.6]), 2);
        assert_eq!(t.route(&[-1e300]), 1);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.leaf_ids(), vec![1, 2]);
    }

    #[test]
    fn extends_detects_changed_splits() {
        let base = one_split();
        let mut grown = base.clone();
        grown.split_leaf(2, 0, 4.0);
        assert!(grown.extends(&base));
        assert!(!base.extends(&grown));
        let mut other = DecisionTree::<()>::new();
        other.split_leaf(0, 0, 3.0);
        assert!(!other.extends(&base));
    }

    #[test]
    fn map_leaves_keeps_structure() {
        let t = one_split();
        let labeled = t.map_leaves(|id, _| vec![id]);
        assert_eq!(labeled.leaf_for(&[3.0]), &vec![2]);
        assert_eq!(labeled.structure(), t);
    }
}
