use std::collections::{BTreeMap, VecDeque};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::split::best_split;
use super::{DecisionTree, NodeId};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Stopping and sampling parameters shared by every tree learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthParams {
    /// Features drawn per node expansion. `None` means `⌊√N⌋` (at least 1).
    pub feature_sample_count: Option<usize>,
    /// Maximum leaf depth in edges. `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    /// Minimum number of (bootstrap) rows a leaf needs to be split.
    /// Values below 2 behave exactly like 2.
    pub min_samples_split: usize,
    pub bootstrap: bool,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            feature_sample_count: None,
            max_depth: None,
            min_samples_split: 2,
            bootstrap: true,
        }
    }
}

impl GrowthParams {
    pub fn features_per_node(&self, feature_count: usize) -> usize {
        self.feature_sample_count
            .unwrap_or_else(|| (feature_count as f64).sqrt().floor() as usize)
            .clamp(1, feature_count.max(1))
    }

    pub fn validate(&self, feature_count: usize) -> Result<()> {
        let mut problems = self.problems(feature_count);
        match problems.len() {
            0 => Ok(()),
            1 => Err(Error::InvalidParameter(problems.remove(0))),
            _ => Err(Error::Config(problems)),
        }
    }

    pub(crate) fn problems(&self, feature_count: usize) -> Vec<String> {
        let mut problems = Vec::new();
        if let Some(n) = self.feature_sample_count {
            if n == 0 || n > feature_count {
                problems.push(format!(
                    "feature_sample_count must be in 1..={feature_count}, got {n}"
                ));
            }
        }
        if self.max_depth == Some(0) {
            problems.push("max_depth must be at least 1".into());
        }
        if self.min_samples_split == 0 {
            problems.push("min_samples_split must be at least 1".into());
        }
        problems
    }
}

/// What one call to [`grow`] did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthReport {
    /// Rows the tree was grown on: the bootstrap draw, or the local rows
    /// when bootstrapping is off.
    pub sample: Vec<usize>,
    pub nodes_before: usize,
    pub nodes_after: usize,
}

/// Grow `tree` further on one client's rows.
///
/// The sample is routed through the existing splits; every leaf that then
/// holds at least `min_samples_split` rows of more than one class, and sits
/// above the depth cap, is split on the best of `N′` freshly drawn features
/// and its children are expanded in turn. Pending leaves are always
/// expanded in ascending node-id order. Existing splits are never altered
/// and leaves carry no payload.
pub fn grow(
    tree: &mut DecisionTree,
    ds: &Dataset,
    rows: &[usize],
    params: &GrowthParams,
    rng: &mut impl Rng,
) -> GrowthReport {
    let nodes_before = tree.node_count();
    let sample: Vec<usize> = if params.bootstrap && !rows.is_empty() {
        (0..rows.len())
            .map(|_| rows[rng.random_range(0..rows.len())])
            .collect()
    } else {
        rows.to_vec()
    };

    let mut arriving: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for &r in &sample {
        arriving.entry(tree.route(ds.row(r))).or_default().push(r);
    }

    let depths = tree.node_depths();
    let mut pending: VecDeque<(NodeId, usize, Vec<usize>)> = arriving
        .into_iter()
        .map(|(leaf, rows)| (leaf, depths[leaf], rows))
        .collect();

    let feature_count = ds.feature_count();
    let per_node = params.features_per_node(feature_count);
    let min_split = params.min_samples_split.max(2);

    while let Some((leaf, depth, rows)) = pending.pop_front() {
        if rows.len() < min_split || params.max_depth.is_some_and(|d| depth >= d) {
            continue;
        }
        let first = ds.label(rows[0]);
        if rows.iter().all(|&r| ds.label(r) == first) {
            continue;
        }
        let features = index::sample(rng, feature_count, per_node).into_vec();
        let Some(split) = best_split(ds, &rows, &features) else {
            continue;
        };
        let (left_id, right_id) = tree.split_leaf(leaf, split.feature, split.threshold);
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| ds.value(r, split.feature) <= split.threshold);
        pending.push_back((left_id, depth + 1, left));
        pending.push_back((right_id, depth + 1, right));
    }

    GrowthReport {
        sample,
        nodes_before,
        nodes_after: tree.node_count(),
    }
}
