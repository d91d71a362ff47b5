//! Comparison models. All of them reuse the tree learner in [`crate::tree`].
//!
//! * centralized RF: every tree sees a bootstrap of all training data;
//! * non-collaborative federated forest (NCFF): each client grows its share
//!   of the trees on its own shard only;
//! * CFF-CP: the collaborative growth phase, but leaves hold class
//!   probabilities from the summed per-client class frequencies;
//! * Markovic-style selection: per-client forests, keep each client's most
//!   accurate trees on a local validation split, accuracy-weighted vote.

mod cffcp;
mod markovic;

pub use cffcp::{train_cffcp, train_cffcp_audited};
pub use markovic::{
    train_markovic, ClientSelection, MarkovicModel, MarkovicParams, WeightedForest,
};

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::{Classifier, TreeShape};
use crate::federation::{EnsembleModel, FederationConfig, PermutationSchedule};
use crate::rng::{self, StreamRng};
use crate::tree::{adjust_leaves, grow, leaf_class_counts, DecisionTree, GrowthParams, LabelList};

/// Tree whose leaves hold class probabilities. An empty vector marks a leaf
/// that abstains.
pub type ProbabilityLeafTree = DecisionTree<Vec<f64>>;

/// Forest predicting by averaging leaf probability vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityForest {
    pub class_count: usize,
    pub trees: Vec<ProbabilityLeafTree>,
}

impl ProbabilityForest {
    /// Mean of the non-abstaining leaf vectors reached by `sample`.
    pub fn average_probabilities(&self, sample: &[f64]) -> Vec<f64> {
        let mut sum = vec![0.0; self.class_count];
        let mut voters = 0usize;
        for tree in &self.trees {
            let p = tree.leaf_for(sample);
            if p.is_empty() {
                continue;
            }
            voters += 1;
            for (s, v) in sum.iter_mut().zip(p) {
                *s += v;
            }
        }
        if voters > 0 {
            sum.iter_mut().for_each(|s| *s /= voters as f64);
        }
        sum
    }

    /// Argmax of the averaged probabilities, ties to the lowest class id.
    pub fn predict(&self, sample: &[f64]) -> usize {
        argmax_lowest(&self.average_probabilities(sample))
    }
}

impl Classifier for ProbabilityForest {
    fn class_count(&self) -> usize {
        self.class_count
    }

    fn predict_with(&self, sample: &[f64], _rng: &mut StreamRng) -> usize {
        self.predict(sample)
    }

    fn tree_shapes(&self) -> Vec<TreeShape> {
        self.trees.iter().map(TreeShape::of).collect()
    }
}

pub(crate) fn argmax_lowest(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Normalize counts to fractions; all-zero counts give an abstaining leaf.
pub fn normalize_counts(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Vec::new();
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Fill a grown structure's leaves with the class fractions of `rows`.
pub fn probability_leaves(
    structure: &DecisionTree,
    ds: &Dataset,
    rows: &[usize],
) -> ProbabilityLeafTree {
    let counts = leaf_class_counts(structure, ds, rows);
    structure.map_leaves(|leaf, _| {
        counts
            .get(&leaf)
            .map(|c| normalize_counts(c))
            .unwrap_or_default()
    })
}

/// Grow one standalone tree on `rows`, returning the structure and the rows
/// it was grown on.
fn grow_standalone(
    ds: &Dataset,
    rows: &[usize],
    params: &GrowthParams,
    seed: u64,
    tree: usize,
) -> (DecisionTree, Vec<usize>) {
    let mut structure = DecisionTree::new();
    let report = grow(
        &mut structure,
        ds,
        rows,
        params,
        &mut rng::tree_stream(seed, tree, 1),
    );
    (structure, report.sample)
}

fn check_rows(rows: &[usize], what: &str) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} has no rows")));
    }
    Ok(())
}

/// Standard random forest on all training rows. Tree `t` uses the same
/// stream as tree `t` of a single-client federation with the same seed.
pub fn train_centralized_rf(
    ds: &Dataset,
    train: &[usize],
    trees: usize,
    params: &GrowthParams,
    seed: u64,
) -> Result<ProbabilityForest> {
    check_rows(train, "training set")?;
    params.validate(ds.feature_count())?;
    let trees = (0..trees)
        .into_par_iter()
        .map(|t| {
            let (structure, sample) = grow_standalone(ds, train, params, seed, t);
            probability_leaves(&structure, ds, &sample)
        })
        .collect();
    Ok(ProbabilityForest {
        class_count: ds.class_count(),
        trees,
    })
}

/// Centralized RF whose leaves hold the majority label of all training rows
/// reaching them, voted like the collaborative model. This is what a
/// single-client federation computes.
pub fn train_centralized_majority(
    ds: &Dataset,
    train: &[usize],
    trees: usize,
    params: &GrowthParams,
    seed: u64,
) -> Result<EnsembleModel> {
    check_rows(train, "training set")?;
    params.validate(ds.feature_count())?;
    let grown: Vec<DecisionTree<LabelList>> = (0..trees)
        .into_par_iter()
        .map(|t| {
            let (structure, _) = grow_standalone(ds, train, params, seed, t);
            let majority = adjust_leaves(&structure, ds, train);
            structure
                .map_leaves(|leaf, _| majority.get(&leaf).map(|&l| vec![l]).unwrap_or_default())
        })
        .collect();
    Ok(EnsembleModel {
        class_count: ds.class_count(),
        config: FederationConfig {
            trees,
            clients: 1,
            growth: *params,
            master_seed: seed,
        },
        schedule: PermutationSchedule {
            per_tree_order: vec![vec![0]; trees],
        },
        trees: grown,
    })
}

/// Number of trees each client grows under NCFF: `⌊m/k⌋`, with the
/// remainder going to the lowest client ids.
pub fn ncff_tree_counts(trees: usize, clients: usize) -> Vec<usize> {
    (0..clients)
        .map(|i| trees / clients + usize::from(i < trees % clients))
        .collect()
}

/// Non-collaborative federated forest: each client grows its trees on its
/// own shard only; the server concatenates them in client order.
pub fn train_ncff(
    ds: &Dataset,
    shards: &[Vec<usize>],
    trees: usize,
    params: &GrowthParams,
    seed: u64,
) -> Result<ProbabilityForest> {
    if shards.is_empty() {
        return Err(Error::InvalidParameter(
            "ncff needs at least one client".into(),
        ));
    }
    if let Some(client) = shards.iter().position(Vec::is_empty) {
        return Err(Error::EmptyShard { client });
    }
    params.validate(ds.feature_count())?;
    let owners: Vec<usize> = ncff_tree_counts(trees, shards.len())
        .into_iter()
        .enumerate()
        .flat_map(|(client, n)| std::iter::repeat_n(client, n))
        .collect();
    let trees = owners
        .par_iter()
        .enumerate()
        .map(|(t, &client)| {
            let (structure, sample) = grow_standalone(ds, &shards[client], params, seed, t);
            probability_leaves(&structure, ds, &sample)
        })
        .collect();
    Ok(ProbabilityForest {
        class_count: ds.class_count(),
        trees,
    })
}
