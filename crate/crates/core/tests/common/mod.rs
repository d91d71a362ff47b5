//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use fedforest::data::Dataset;
use fedforest::tree::{DecisionTree, LeafPayload, NodeKind, WireNode, WireTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Entropy in bits, computed straight from the definition with natural logs.
pub fn naive_entropy(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let max = labels.iter().copied().max().unwrap_or(0);
    (0..=max)
        .map(|c| labels.iter().filter(|&&l| l == c).count() as f64 / n)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln() / std::f64::consts::LN_2)
        .sum()
}

/// Every `(feature, midpoint, gain)` candidate over all features, in
/// feature then threshold order.
pub fn all_candidates(ds: &Dataset, rows: &[usize]) -> Vec<(usize, f64, f64)> {
    let labels: Vec<usize> = rows.iter().map(|&r| ds.label(r)).collect();
    let parent = naive_entropy(&labels);
    let mut out = Vec::new();
    for f in 0..ds.feature_count() {
        let mut values: Vec<f64> = rows.iter().map(|&r| ds.value(r, f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<usize> = rows
                .iter()
                .filter(|&&r| ds.value(r, f) <= t)
                .map(|&r| ds.label(r))
                .collect();
            let right: Vec<usize> = rows
                .iter()
                .filter(|&&r| ds.value(r, f) > t)
                .map(|&r| ds.label(r))
                .collect();
            let n = rows.len() as f64;
            let gain = parent
                - left.len() as f64 / n * naive_entropy(&left)
                - right.len() as f64 / n * naive_entropy(&right);
            out.push((f, t, gain));
        }
    }
    out
}

/// Small random dataset with integer-ish values so ties actually happen.
pub fn random_dataset(rng: &mut impl Rng, max_rows: usize, max_features: usize) -> Dataset {
    loop {
        let classes = rng.random_range(2..=4);
        let features = rng.random_range(1..=max_features);
        let n = rng.random_range(classes..=max_rows);
        let levels = rng.random_range(2..=8);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..features)
                    .map(|_| rng.random_range(0..levels) as f64 * 0.5)
                    .collect()
            })
            .collect();
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
        labels[..classes]
            .iter_mut()
            .enumerate()
            .for_each(|(c, l)| *l = c);
        if let Ok(ds) = Dataset::from_rows(rows, labels) {
            return ds;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Build a tree through the public wire format. `nodes[i]` is either a
/// split `(feature, threshold, left, right)` or a leaf payload.
pub enum NodeSpec<L> {
    Split(usize, f64, usize, usize),
    Leaf(L),
}

pub fn build_tree<L: LeafPayload + Clone>(nodes: Vec<NodeSpec<L>>) -> DecisionTree<L> {
    let nodes = nodes
        .into_iter()
        .enumerate()
        .map(|(id, s)| {
            let mut node = WireNode {
                id,
                kind: NodeKind::Leaf,
                feature: None,
                threshold: None,
                children: None,
                label_list: None,
                probabilities: None,
            };
            match s {
                NodeSpec::Split(f, t, l, r) => {
                    node.kind = NodeKind::Split;
                    node.feature = Some(f);
                    node.threshold = Some(t);
                    node.children = Some([l, r]);
                }
                NodeSpec::Leaf(payload) => payload.write(&mut node),
            }
            node
        })
        .collect();
    DecisionTree::from_wire(&WireTree { nodes }).expect("valid test tree")
}

/// Random tree shape of up to `max_splits` splits, built breadth-first so
/// child ids exceed parent ids.
pub fn random_shape(rng: &mut impl Rng, max_splits: usize) -> DecisionTree<Vec<usize>> {
    let splits = rng.random_range(0..=max_splits);
    let mut kinds: Vec<Option<(usize, f64, usize, usize)>> = vec![None];
    for _ in 0..splits {
        let leaves: Vec<usize> = (0..kinds.len()).filter(|&i| kinds[i].is_none()).collect();
        let leaf = leaves[rng.random_range(0..leaves.len())];
        let left = kinds.len();
        kinds.push(None);
        kinds.push(None);
        kinds[leaf] = Some((
            rng.random_range(0..3),
            rng.random_range(-2.0..2.0),
            left,
            left + 1,
        ));
    }
    build_tree(
        kinds
            .into_iter()
            .map(|k| match k {
                Some((f, t, l, r)) => NodeSpec::Split(f, t, l, r),
                None => NodeSpec::Leaf(Vec::new()),
            })
            .collect(),
    )
}

/// Recursive (node count, leaf count, max depth) of the subtree at `id`.
pub fn recursive_counts<L>(tree: &DecisionTree<L>, id: usize) -> (usize, usize, usize) {
    match tree.node(id) {
        fedforest::tree::Node::Leaf(_) => (1, 1, 0),
        fedforest::tree::Node::Internal(s) => {
            let (ln, ll, ld) = recursive_counts(tree, s.left);
            let (rn, rl, rd) = recursive_counts(tree, s.right);
            (1 + ln + rn, ll + rl, 1 + ld.max(rd))
        }
    }
}
