use std::collections::BTreeMap;

use super::{DecisionTree, NodeId};
use crate::data::Dataset;

/// One client's majority label for every leaf its data reaches. Leaves no
/// local row reaches are absent.
pub type LeafAdjustment = BTreeMap<NodeId, usize>;

/// Per-class counts of `rows` at every leaf they reach.
pub fn leaf_class_counts<L>(
    tree: &DecisionTree<L>,
    ds: &Dataset,
    rows: &[usize],
) -> BTreeMap<NodeId, Vec<usize>> {
    let mut counts: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        let leaf = tree.route(ds.row(r));
        counts
            .entry(leaf)
            .or_insert_with(|| vec![0; ds.class_count()])[ds.label(r)] += 1;
    }
    counts
}

/// Class with the highest count; ties go to the lowest class id.
pub fn majority_label(counts: &[usize]) -> usize {
    let mut best = 0;
    for (class, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = class;
        }
    }
    best
}

/// Route every local row (no resampling) and record the majority label at
/// each leaf reached.
pub fn adjust_leaves<L>(tree: &DecisionTree<L>, ds: &Dataset, rows: &[usize]) -> LeafAdjustment {
    leaf_class_counts(tree, ds, rows)
        .into_iter()
        .map(|(leaf, counts)| (leaf, majority_label(&counts)))
        .collect()
}
