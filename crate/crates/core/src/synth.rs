//! Seeded Gaussian-blob datasets for runs that need no external data.
//!
//! Each class owns a few cluster centres drawn uniformly in a box over the
//! informative features; rows are centres plus isotropic Gaussian noise.
//! Extra uninformative features are uniform noise over the same box.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlobParams {
    pub classes: usize,
    pub rows_per_class: usize,
    pub informative_features: usize,
    pub noise_features: usize,
    pub clusters_per_class: usize,
    /// Half-width of the box cluster centres are drawn from.
    pub center_spread: f64,
    /// Standard deviation of rows around their cluster centre.
    pub cluster_std: f64,
}

impl Default for BlobParams {
    /// Six classes, 625 rows each: an 80:20 split leaves 3,000 training rows.
    /// Sixteen features, like the pen-digit data the defaults were tuned
    /// against.
    fn default() -> Self {
        Self {
            classes: 6,
            rows_per_class: 625,
            informative_features: 12,
            noise_features: 4,
            clusters_per_class: 3,
            center_spread: 4.0,
            cluster_std: 1.2,
        }
    }
}

impl BlobParams {
    /// Ten classes of 1,000 rows with the default geometry.
    pub fn ten_class() -> Self {
        Self {
            classes: 10,
            rows_per_class: 1000,
            ..Self::default()
        }
    }

    pub fn feature_count(&self) -> usize {
        self.informative_features + self.noise_features
    }

    pub fn generate(&self, seed: u64) -> Result<Dataset> {
        if self.classes < 2 || self.rows_per_class == 0 || self.clusters_per_class == 0 {
            return Err(Error::InvalidParameter(
                "blobs need >= 2 classes, >= 1 row per class and >= 1 cluster per class".into(),
            ));
        }
        if self.informative_features == 0 {
            return Err(Error::InvalidParameter(
                "blobs need at least one informative feature".into(),
            ));
        }
        if !(self.center_spread > 0.0 && self.cluster_std > 0.0) {
            return Err(Error::InvalidParameter(
                "center_spread and cluster_std must be positive".into(),
            ));
        }
        let mut rng = rng::stream(seed, Domain::Synthetic, &[]);
        let noise = Normal::new(0.0, self.cluster_std).expect("std checked positive");
        let s = self.center_spread;

        let centers: Vec<Vec<Vec<f64>>> = (0..self.classes)
            .map(|_| {
                (0..self.clusters_per_class)
                    .map(|_| {
                        (0..self.informative_features)
                            .map(|_| rng.random_range(-s..s))
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let mut rows = Vec::with_capacity(self.classes * self.rows_per_class);
        let mut labels = Vec::with_capacity(rows.capacity());
        for (class, clusters) in centers.iter().enumerate() {
            for i in 0..self.rows_per_class {
                let center = &clusters[i % clusters.len()];
                let mut row: Vec<f64> =
                    center.iter().map(|&c| c + noise.sample(&mut rng)).collect();
                row.extend((0..self.noise_features).map(|_| rng.random_range(-s..s)));
                rows.push(row);
                labels.push(class);
            }
        }
        Dataset::from_rows(rows, labels)
    }
}
