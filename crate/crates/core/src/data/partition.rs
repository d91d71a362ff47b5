use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    Iid,
    AlphaChunking { alpha: usize },
}

/// Assignment of training rows to clients. Shards are pairwise disjoint,
/// non-empty, sorted ascending, and together cover the training rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub mode: PartitionMode,
    pub shards: Vec<Vec<usize>>,
}

/// One line of the partition audit: a client's shard size and class mix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardReport {
    pub client: usize,
    pub rows: usize,
    pub distinct_classes: usize,
    pub class_histogram: Vec<usize>,
}

impl PartitionPlan {
    pub fn client_count(&self) -> usize {
        self.shards.len()
    }

    pub fn report(&self, ds: &Dataset) -> Vec<ShardReport> {
        self.shards
            .iter()
            .enumerate()
            .map(|(client, shard)| {
                let class_histogram = ds.class_histogram(shard);
                ShardReport {
                    client,
                    rows: shard.len(),
                    distinct_classes: class_histogram.iter().filter(|&&n| n > 0).count(),
                    class_histogram,
                }
            })
            .collect()
    }

    /// Plain-text audit table: one line per shard with its class histogram.
    pub fn report_text(&self, ds: &Dataset) -> String {
        let mut out = match self.mode {
            PartitionMode::Iid => format!("partition iid, {} clients\n", self.shards.len()),
            PartitionMode::AlphaChunking { alpha } => format!(
                "partition alpha_chunking alpha={alpha}, {} clients, M={}\n",
                self.shards.len(),
                max_classes_per_client(ds.class_count(), alpha, self.shards.len())
            ),
        };
        for r in self.report(ds) {
            let hist: Vec<String> = r.class_histogram.iter().map(usize::to_string).collect();
            out.push_str(&format!(
                "client {:>3}  rows {:>6}  classes {:>3}  [{}]\n",
                r.client,
                r.rows,
                r.distinct_classes,
                hist.join(" ")
            ));
        }
        out
    }
}

/// Upper bound on distinct classes per client under α-chunking:
/// `M = ⌈c·α / k⌉`.
pub fn max_classes_per_client(classes: usize, alpha: usize, clients: usize) -> usize {
    (classes * alpha).div_ceil(clients)
}

/// Non-IID partition: each class's training rows are shuffled and cut into
/// `alpha` contiguous chunks whose sizes differ by at most one; all chunks
/// are then shuffled together and dealt round-robin starting at client 0.
pub fn partition_alpha_chunking(
    ds: &Dataset,
    train: &[usize],
    clients: usize,
    alpha: usize,
    seed: u64,
) -> Result<PartitionPlan> {
    if clients == 0 || alpha == 0 {
        return Err(Error::InvalidParameter(format!(
            "alpha chunking needs clients >= 1 and alpha >= 1 (got {clients}, {alpha})"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut chunks: Vec<Vec<usize>> = Vec::with_capacity(ds.class_count() * alpha);
    for (class, mut rows) in ds.rows_by_class(train).into_iter().enumerate() {
        if rows.len() < alpha {
            return Err(Error::ClassTooSmall {
                class,
                rows: rows.len(),
                required: alpha,
            });
        }
        rows.shuffle(&mut rng);
        let base = rows.len() / alpha;
        let extra = rows.len() % alpha;
        let mut start = 0;
        for chunk in 0..alpha {
            let len = base + usize::from(chunk < extra);
            chunks.push(rows[start..start + len].to_vec());
            start += len;
        }
    }
    chunks.shuffle(&mut rng);

    let mut shards = vec![Vec::new(); clients];
    for (i, chunk) in chunks.into_iter().enumerate() {
        shards[i % clients].extend(chunk);
    }
    finish(PartitionMode::AlphaChunking { alpha }, shards)
}

/// IID partition: each class's training rows are shuffled and dealt
/// round-robin, so every client holds an equal share of every class.
pub fn partition_iid(
    ds: &Dataset,
    train: &[usize],
    clients: usize,
    seed: u64,
) -> Result<PartitionPlan> {
    if clients == 0 {
        return Err(Error::InvalidParameter(
            "iid partition needs clients >= 1".into(),
        ));
    }
    let mut rng = rng::seeded(seed);
    let mut shards = vec![Vec::new(); clients];
    for (class, mut rows) in ds.rows_by_class(train).into_iter().enumerate() {
        if rows.len() < clients {
            return Err(Error::ClassTooSmall {
                class,
                rows: rows.len(),
                required: clients,
            });
        }
        rows.shuffle(&mut rng);
        for (i, row) in rows.into_iter().enumerate() {
            shards[i % clients].push(row);
        }
    }
    finish(PartitionMode::Iid, shards)
}

fn finish(mode: PartitionMode, mut shards: Vec<Vec<usize>>) -> Result<PartitionPlan> {
    if let Some(client) = shards.iter().position(Vec::is_empty) {
        return Err(Error::EmptyShard { client });
    }
    for shard in &mut shards {
        shard.sort_unstable();
    }
    Ok(PartitionPlan { mode, shards })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dataset(class_sizes: &[usize]) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, &n) in class_sizes.iter().enumerate() {
            for i in 0..n {
                rows.push(vec![i as f64]);
                labels.push(c);
            }
        }
        Dataset::from_rows(rows, labels).unwrap()
    }

    fn all_rows(ds: &Dataset) -> Vec<usize> {
        (0..ds.len()).collect()
    }

    fn assert_exact_partition(plan: &PartitionPlan, train: &[usize]) {
        let mut union: Vec<usize> = plan.shards.iter().flatten().copied().collect();
        union.sort_unstable();
        let mut expected = train.to_vec();
        expected.sort_unstable();
        assert_eq!(union, expected);
        assert!(plan.shards.iter().all(|s| !s.is_empty()));
    }

    #[test]
    fn eq1_values() {
        assert_eq!(max_classes_per_client(10, 2, 10), 2);
        assert_eq!(max_classes_per_client(6, 4, 10), 3);
        assert_eq!(max_classes_per_client(1, 1, 1), 1);
        assert_eq!(max_classes_per_client(26, 1, 10), 3);
    }

    #[test]
    fn alpha_one_gives_whole_classes() {
        let ds = dataset(&[6, 4]);
        let plan = partition_alpha_chunking(&ds, &all_rows(&ds), 2, 1, 3).unwrap();
        let mut sizes: Vec<Vec<usize>> = plan
            .report(&ds)
            .into_iter()
            .map(|r| r.class_histogram)
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![vec![0, 4], vec![6, 0]]);
    }

    #[test]
    fn three_classes_two_chunks_three_clients() {
        // 6 chunks of 6 rows dealt round-robin: every client gets exactly 2.
        let ds = dataset(&[12, 12, 12]);
        let plan = partition_alpha_chunking(&ds, &all_rows(&ds), 3, 2, 11).unwrap();
        for shard in &plan.shards {
            assert_eq!(shard.len(), 12);
        }
        assert_exact_partition(&plan, &all_rows(&ds));
    }

    #[test]
    fn statlog_shape_respects_m() {
        let ds = dataset(&[100, 90, 80, 70, 60, 50]);
        for seed in 0..50 {
            let plan = partition_alpha_chunking(&ds, &all_rows(&ds), 10, 4, seed).unwrap();
            assert!(plan.report(&ds).iter().all(|r| r.distinct_classes <= 3));
        }
    }

    #[test]
    fn chunk_sizes_differ_by_at_most_one() {
        // one class, alpha = k: each client holds exactly one chunk
        let ds = dataset(&[23]);
        let plan = partition_alpha_chunking(&ds, &all_rows(&ds), 5, 5, 2).unwrap();
        let mut sizes: Vec<usize> = plan.shards.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![4, 4, 5, 5, 5]);
    }

    #[test]
    fn class_smaller_than_alpha_is_rejected() {
        let ds = dataset(&[23, 2]);
        assert!(matches!(
            partition_alpha_chunking(&ds, &all_rows(&ds), 5, 3, 2),
            Err(Error::ClassTooSmall {
                class: 1,
                rows: 2,
                required: 3
            })
        ));
    }

    #[test]
    fn too_few_chunks_leaves_empty_shard() {
        let ds = dataset(&[10, 10]);
        assert!(matches!(
            partition_alpha_chunking(&ds, &all_rows(&ds), 3, 1, 0),
            Err(Error::EmptyShard { client: 2 })
        ));
    }

    #[test]
    fn iid_single_client_is_whole_train_set() {
        let ds = dataset(&[7, 9]);
        let plan = partition_iid(&ds, &all_rows(&ds), 1, 4).unwrap();
        assert_eq!(plan.shards, vec![all_rows(&ds)]);
    }

    #[test]
    fn iid_equal_class_shares() {
        let ds = dataset(&[100, 100, 100, 100]);
        let plan = partition_iid(&ds, &all_rows(&ds), 10, 8).unwrap();
        for r in plan.report(&ds) {
            assert_eq!(r.class_histogram, vec![10, 10, 10, 10]);
        }
        assert_eq!(plan, partition_iid(&ds, &all_rows(&ds), 10, 8).unwrap());
    }

    #[test]
    fn iid_needs_k_rows_per_class() {
        let ds = dataset(&[20, 3]);
        assert!(matches!(
            partition_iid(&ds, &all_rows(&ds), 4, 0),
            Err(Error::ClassTooSmall {
                class: 1,
                rows: 3,
                required: 4
            })
        ));
    }

    #[test]
    fn report_text_lists_every_client() {
        let ds = dataset(&[4, 4]);
        let plan = partition_iid(&ds, &all_rows(&ds), 2, 0).unwrap();
        let text = plan.report_text(&ds);
        assert!(text.starts_with("partition iid, 2 clients"));
        assert!(text.contains("client   1  rows      4  classes   2  [2 2]"));
    }

    proptest! {
        #[test]
        fn alpha_plans_are_exact_and_bounded(
            sizes in prop::collection::vec(6usize..40, 2..8),
            clients in 1usize..8,
            alpha in 1usize..6,
            seed in any::<u64>(),
        ) {
            let ds = dataset(&sizes);
            let train = all_rows(&ds);
            match partition_alpha_chunking(&ds, &train, clients, alpha, seed) {
                Ok(plan) => {
                    assert_exact_partition(&plan, &train);
                    let m = max_classes_per_client(ds.class_count(), alpha, clients);
                    prop_assert!(plan.report(&ds).iter().all(|r| r.distinct_classes <= m));
                    prop_assert_eq!(&plan, &partition_alpha_chunking(&ds, &train, clients, alpha, seed).unwrap());
                }
                Err(Error::EmptyShard { .. }) => prop_assert!(sizes.len() * alpha < clients),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }

        #[test]
        fn iid_plans_are_exact(
            sizes in prop::collection::vec(8usize..40, 2..6),
            clients in 1usize..8,
            seed in any::<u64>(),
        ) {
            let ds = dataset(&sizes);
            let train = all_rows(&ds);
            let plan = partition_iid(&ds, &train, clients, seed).unwrap();
            assert_exact_partition(&plan, &train);
            let lens: Vec<usize> = plan.shards.iter().map(Vec::len).collect();
            let spread = lens.iter().max().unwrap() - lens.iter().min().unwrap();
            prop_assert!(spread <= ds.class_count());
            prop_assert!(plan.report(&ds).iter().all(|r| r.distinct_classes == ds.class_count()));
        }
    }
}
