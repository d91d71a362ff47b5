//! Prediction, accuracy and structural statistics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::federation::EnsembleModel;
use crate::rng::{self, Domain, StreamRng};
use crate::tree::{DecisionTree, Node};

/// Anything that can label a sample. `rng` is only consulted to break ties.
pub trait Classifier: Sync {
    fn class_count(&self) -> usize;
    fn predict_with(&self, sample: &[f64], rng: &mut StreamRng) -> usize;
    fn tree_shapes(&self) -> Vec<TreeShape>;
}

/// Node/leaf counts and depths of one tree, found by walking it from the
/// root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeShape {
    pub nodes: usize,
    pub leaves: usize,
    pub max_depth: usize,
    pub mean_leaf_depth: f64,
}

impl TreeShape {
    pub fn of<L>(tree: &DecisionTree<L>) -> Self {
        let mut nodes = 0;
        let mut leaves = 0;
        let mut max_depth = 0;
        let mut depth_sum = 0;
        let mut stack = vec![(tree.root(), 0usize)];
        while let Some((id, depth)) = stack.pop() {
            nodes += 1;
            match tree.node(id) {
                Node::Internal(s) => {
                    stack.push((s.left, depth + 1));
                    stack.push((s.right, depth + 1));
                }
                Node::Leaf(_) => {
                    leaves += 1;
                    depth_sum += depth;
                    max_depth = max_depth.max(depth);
                }
            }
        }
        Self {
            nodes,
            leaves,
            max_depth,
            mean_leaf_depth: depth_sum as f64 / leaves as f64,
        }
    }
}

/// Forest-level means of per-tree node count, leaf count and max depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub mean_nodes: f64,
    pub mean_leaves: f64,
    pub mean_max_depth: f64,
}

pub fn node_stats_of(shapes: &[TreeShape]) -> Result<NodeStats> {
    if shapes.is_empty() {
        return Err(Error::InvalidParameter(
            "node statistics of an empty forest".into(),
        ));
    }
    let n = shapes.len() as f64;
    Ok(NodeStats {
        mean_nodes: shapes.iter().map(|s| s.nodes as f64).sum::<f64>() / n,
        mean_leaves: shapes.iter().map(|s| s.leaves as f64).sum::<f64>() / n,
        mean_max_depth: shapes.iter().map(|s| s.max_depth as f64).sum::<f64>() / n,
    })
}

pub fn node_stats<L>(forest: &[DecisionTree<L>]) -> Result<NodeStats> {
    let shapes: Vec<TreeShape> = forest.iter().map(TreeShape::of).collect();
    node_stats_of(&shapes)
}

/// Class-frequency vector `F`: every label in every reached leaf's list is
/// one vote.
pub fn vote(model: &EnsembleModel, sample: &[f64]) -> Vec<usize> {
    let mut freq = vec![0; model.class_count];
    for tree in &model.trees {
        for &label in tree.leaf_for(sample) {
            freq[label] += 1;
        }
    }
    freq
}

/// Index of the largest score; ties are settled uniformly at random among
/// the tied classes. The stream is only advanced when there is a tie.
pub fn argmax_random_tie(scores: &[usize], rng: &mut impl Rng) -> usize {
    let best = scores.iter().copied().max().unwrap_or(0);
    let tied: Vec<usize> = (0..scores.len()).filter(|&c| scores[c] == best).collect();
    match tied.len() {
        0 => 0,
        1 => tied[0],
        n => tied[rng.random_range(0..n)],
    }
}

/// Majority vote over the concatenated label lists of the leaves `sample`
/// reaches. When every reached list is empty all classes tie.
pub fn predict_ensemble(model: &EnsembleModel, sample: &[f64], rng: &mut impl Rng) -> usize {
    argmax_random_tie(&vote(model, sample), rng)
}

impl Classifier for EnsembleModel {
    fn class_count(&self) -> usize {
        self.class_count
    }

    fn predict_with(&self, sample: &[f64], rng: &mut StreamRng) -> usize {
        predict_ensemble(self, sample, rng)
    }

    fn tree_shapes(&self) -> Vec<TreeShape> {
        self.trees.iter().map(TreeShape::of).collect()
    }
}

/// Tie-break stream for one dataset row; predictions agree whether rows are
/// processed serially or in parallel.
pub fn row_stream(seed: u64, row: usize) -> StreamRng {
    rng::stream(seed, Domain::TieBreak, &[row as u64])
}

pub fn predict_rows(
    model: &impl Classifier,
    ds: &Dataset,
    rows: &[usize],
    seed: u64,
) -> Vec<usize> {
    rows.par_iter()
        .map(|&r| model.predict_with(ds.row(r), &mut row_stream(seed, r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub mean_nodes: f64,
    pub mean_leaves: f64,
    /// Mean over trees of the deepest leaf ("depth reached").
    pub mean_max_depth: f64,
    pub mean_leaf_depth: f64,
}

pub fn evaluate(
    model: &impl Classifier,
    ds: &Dataset,
    test: &[usize],
    seed: u64,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::InvalidParameter(
            "evaluation needs at least one test row".into(),
        ));
    }
    let predictions = predict_rows(model, ds, test, seed);
    let correct = test
        .iter()
        .zip(&predictions)
        .filter(|(&r, &p)| ds.label(r) == p)
        .count();
    let shapes = model.tree_shapes();
    let stats = node_stats_of(&shapes)?;
    Ok(EvalReport {
        seed,
        accuracy: correct as f64 / test.len() as f64,
        correct,
        total: test.len(),
        mean_nodes: stats.mean_nodes,
        mean_leaves: stats.mean_leaves,
        mean_max_depth: stats.mean_max_depth,
        mean_leaf_depth: shapes.iter().map(|s| s.mean_leaf_depth).sum::<f64>()
            / shapes.len() as f64,
    })
}

/// Arithmetic means of a set of per-run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanReport {
    pub runs: usize,
    pub mean_accuracy: f64,
    pub mean_nodes: f64,
    pub mean_leaves: f64,
    pub mean_max_depth: f64,
    pub mean_leaf_depth: f64,
}

pub fn mean_report(reports: &[EvalReport]) -> MeanReport {
    let n = reports.len().max(1) as f64;
    let mean = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    MeanReport {
        runs: reports.len(),
        mean_accuracy: mean(|r| r.accuracy),
        mean_nodes: mean(|r| r.mean_nodes),
        mean_leaves: mean(|r| r.mean_leaves),
        mean_max_depth: mean(|r| r.mean_max_depth),
        mean_leaf_depth: mean(|r| r.mean_leaf_depth),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::federation::{FederationConfig, PermutationSchedule};
    use crate::tree::GrowthParams;

    fn model_of(trees: Vec<DecisionTree<Vec<usize>>>, classes: usize) -> EnsembleModel {
        let m = trees.len();
        EnsembleModel {
            class_count: classes,
            config: FederationConfig {
                trees: m,
                clients: 1,
                growth: GrowthParams::default(),
                master_seed: 0,
            },
            schedule: PermutationSchedule {
                per_tree_order: vec![vec![0]; m],
            },
            trees,
        }
    }

    fn leaf(labels: Vec<usize>) -> DecisionTree<Vec<usize>> {
        DecisionTree::<()>::new().map_leaves(|_, _| labels.clone())
    }

    #[test]
    fn single_leaf_single_label() {
        let m = model_of(vec![leaf(vec![1])], 3);
        assert_eq!(predict_ensemble(&m, &[0.0], &mut rng::seeded(0)), 1);
    }

    #[test]
    fn empty_lists_tie_over_all_classes() {
        let m = model_of(vec![leaf(vec![]), leaf(vec![])], 4);
        assert_eq!(vote(&m, &[0.0]), vec![0, 0, 0, 0]);
        let mut seen = [false; 4];
        for seed in 0..200 {
            seen[predict_ensemble(&m, &[0.0], &mut rng::seeded(seed))] = true;
        }
        assert_eq!(seen, [true; 4]);
    }

    #[test]
    fn ties_only_pick_tied_classes() {
        let m = model_of(vec![leaf(vec![0, 2]), leaf(vec![2, 0, 1])], 3);
        for seed in 0..50 {
            let p = predict_ensemble(&m, &[0.0], &mut rng::seeded(seed));
            assert!(p == 0 || p == 2);
        }
    }

    #[test]
    fn shapes() {
        let single: DecisionTree = DecisionTree::new();
        let stats = node_stats(&[single.clone(), single]).unwrap();
        assert_eq!(
            (stats.mean_nodes, stats.mean_leaves, stats.mean_max_depth),
            (1.0, 1.0, 0.0)
        );
        let mut t: DecisionTree = DecisionTree::new();
        t.split_leaf(0, 0, 1.0);
        let stats = node_stats(&[t]).unwrap();
        assert_eq!(
            (stats.mean_nodes, stats.mean_leaves, stats.mean_max_depth),
            (3.0, 2.0, 1.0)
        );
        assert!(node_stats::<()>(&[]).is_err());
    }
}
