use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax_lowest, probability_leaves, ProbabilityLeafTree};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::{Classifier, TreeShape};
use crate::rng::{self, Domain, StreamRng};
use crate::tree::{grow, DecisionTree, GrowthParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkovicParams {
    pub per_client_forest_size: usize,
    pub top_t: usize,
    /// Share of each client's rows held out for tree selection. The default
    /// 1/8 turns an 80% training share into a 70/10 train/validation split.
    pub validation_fraction: f64,
}

impl Default for MarkovicParams {
    fn default() -> Self {
        Self {
            per_client_forest_size: 100,
            top_t: 10,
            validation_fraction: 0.125,
        }
    }
}

/// Trees with a per-tree vote weight in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedForest {
    pub class_count: usize,
    pub trees: Vec<ProbabilityLeafTree>,
    pub weights: Vec<f64>,
}

impl WeightedForest {
    /// Every tree votes for the argmax of its leaf; votes are weighted and
    /// the heaviest class wins, ties to the lowest class id.
    pub fn predict(&self, sample: &[f64]) -> usize {
        let mut score = vec![0.0; self.class_count];
        for (tree, &w) in self.trees.iter().zip(&self.weights) {
            let p = tree.leaf_for(sample);
            if !p.is_empty() {
                score[argmax_lowest(p)] += w;
            }
        }
        argmax_lowest(&score)
    }
}

impl Classifier for WeightedForest {
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

/// Validation accuracy of every tree a client trained and which were kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientSelection {
    pub client: usize,
    pub accuracies: Vec<f64>,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovicModel {
    pub forest: WeightedForest,
    pub selection: Vec<ClientSelection>,
}

impl Classifier for MarkovicModel {
    fn class_count(&self) -> usize {
        self.forest.class_count
    }

    fn predict_with(&self, sample: &[f64], rng: &mut StreamRng) -> usize {
        self.forest.predict_with(sample, rng)
    }

    fn tree_shapes(&self) -> Vec<TreeShape> {
        self.forest.tree_shapes()
    }
}

fn tree_vote(tree: &ProbabilityLeafTree, sample: &[f64]) -> Option<usize> {
    let p = tree.leaf_for(sample);
    (!p.is_empty()).then(|| argmax_lowest(p))
}

/// Per-client forests with top-`t` selection by local validation accuracy.
pub fn train_markovic(
    ds: &Dataset,
    shards: &[Vec<usize>],
    growth: &GrowthParams,
    params: &MarkovicParams,
    seed: u64,
) -> Result<MarkovicModel> {
    growth.validate(ds.feature_count())?;
    if params.top_t == 0 || params.top_t > params.per_client_forest_size {
        return Err(Error::InvalidParameter(format!(
            "top_t must be in 1..={}, got {}",
            params.per_client_forest_size, params.top_t
        )));
    }
    if !(params.validation_fraction > 0.0 && params.validation_fraction < 1.0) {
        return Err(Error::InvalidParameter(
            "validation_fraction must lie in (0, 1)".into(),
        ));
    }

    let per_client: Vec<(Vec<ProbabilityLeafTree>, Vec<f64>, ClientSelection)> = shards
        .iter()
        .enumerate()
        .map(|(client, shard)| {
            let mut rows = shard.clone();
            rows.shuffle(&mut rng::stream(seed, Domain::Validation, &[client as u64]));
            let n_val = (params.validation_fraction * rows.len() as f64).floor() as usize;
            if n_val == 0 || n_val == rows.len() {
                return Err(Error::ShardTooSmall {
                    client,
                    rows: rows.len(),
                });
            }
            let (validation, local) = rows.split_at(n_val);

            let trees: Vec<ProbabilityLeafTree> = (0..params.per_client_forest_size)
                .into_par_iter()
                .map(|j| {
                    let mut structure = DecisionTree::new();
                    let mut stream =
                        rng::stream(seed, Domain::ClientTrees, &[client as u64, j as u64]);
                    let report = grow(&mut structure, ds, local, growth, &mut stream);
                    probability_leaves(&structure, ds, &report.sample)
                })
                .collect();
            let accuracies: Vec<f64> = trees
                .iter()
                .map(|tree| {
                    let hits = validation
                        .iter()
                        .filter(|&&r| tree_vote(tree, ds.row(r)) == Some(ds.label(r)))
                        .count();
                    hits as f64 / validation.len() as f64
                })
                .collect();

            let mut ranked: Vec<usize> = (0..trees.len()).collect();
            ranked.sort_by(|&a, &b| accuracies[b].total_cmp(&accuracies[a]).then(a.cmp(&b)));
            let mut selected = ranked[..params.top_t].to_vec();
            selected.sort_unstable();

            let kept_trees = selected.iter().map(|&j| trees[j].clone()).collect();
            let kept_weights = selected.iter().map(|&j| accuracies[j]).collect();
            Ok((
                kept_trees,
                kept_weights,
                ClientSelection {
                    client,
                    accuracies,
                    selected,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let mut forest = WeightedForest {
        class_count: ds.class_count(),
        trees: Vec::new(),
        weights: Vec::new(),
    };
    let mut selection = Vec::new();
    for (trees, weights, sel) in per_client {
        forest.trees.extend(trees);
        forest.weights.extend(weights);
        selection.push(sel);
    }
    Ok(MarkovicModel { forest, selection })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds() -> Dataset {
        crate::synth::BlobParams {
            classes: 3,
            rows_per_class: 40,
            ..Default::default()
        }
        .generate(6)
        .unwrap()
    }

    #[test]
    fn keeps_top_trees_per_client() {
        let d = ds();
        let all: Vec<usize> = (0..d.len()).collect();
        let shards = vec![all[..60].to_vec(), all[60..].to_vec()];
        let params = MarkovicParams {
            per_client_forest_size: 12,
            top_t: 4,
            validation_fraction: 0.25,
        };
        let model = train_markovic(&d, &shards, &GrowthParams::default(), &params, 1).unwrap();
        assert_eq!(model.forest.trees.len(), 8);
        assert!(model.forest.weights.iter().all(|w| (0.0..=1.0).contains(w)));
        for sel in &model.selection {
            let worst_kept = sel
                .selected
                .iter()
                .map(|&j| sel.accuracies[j])
                .fold(f64::INFINITY, f64::min);
            for j in 0..sel.accuracies.len() {
                if !sel.selected.contains(&j) {
                    assert!(sel.accuracies[j] <= worst_kept);
                }
            }
        }
    }

    #[test]
    fn weighted_vote() {
        let a = DecisionTree::<()>::new().map_leaves(|_, _| vec![0.9, 0.1]);
        let b = DecisionTree::<()>::new().map_leaves(|_, _| vec![0.2, 0.8]);
        let mut f = WeightedForest {
            class_count: 2,
            trees: vec![a.clone(), b.clone(), b],
            weights: vec![0.9, 0.4, 0.4],
        };
        assert_eq!(f.predict(&[0.0]), 0);
        f.weights = vec![0.5, 0.25, 0.25];
        assert_eq!(f.predict(&[0.0]), 0);
        f.weights = vec![0.5, 0.3, 0.3];
        assert_eq!(f.predict(&[0.0]), 1);
    }

    #[test]
    fn tiny_shard_is_rejected() {
        let d = ds();
        let err = train_markovic(
            &d,
            &[vec![0, 1, 2]],
            &GrowthParams::default(),
            &MarkovicParams::default(),
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ShardTooSmall { client: 0, rows: 3 }));
        let bad = MarkovicParams {
            top_t: 200,
            ..MarkovicParams::default()
        };
        assert!(
            train_markovic(&d, &[(0..100).collect()], &GrowthParams::default(), &bad, 0).is_err()
        );
    }
}
