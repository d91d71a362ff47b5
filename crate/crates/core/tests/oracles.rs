mod common;

use std::collections::BTreeMap;

use common::{all_candidates, random_dataset, random_shape, recursive_counts, rng};
use fedforest::data::Dataset;
use fedforest::eval::{node_stats, TreeShape};
use fedforest::federation::init_schedule;
use fedforest::tree::{
    adjust_leaves, best_split, entropy, grow, leaf_class_counts, DecisionTree, GrowthParams,
};
use rand::Rng;

#[test]
fn entropy_matches_definition() {
    let mut r = rng(1);
    for _ in 0..500 {
        let labels: Vec<usize> = (0..r.random_range(1..40))
            .map(|_| r.random_range(0..5))
            .collect();
        let mut counts = vec![0; 5];
        labels.iter().for_each(|&l| counts[l] += 1);
        let got = entropy(&counts).unwrap();
        assert!((got - common::naive_entropy(&labels)).abs() < 1e-12);
    }
}

#[test]
fn best_split_matches_exhaustive_search() {
    let mut r = rng(2);
    for _ in 0..300 {
        let ds = random_dataset(&mut r, 30, 4);
        let rows: Vec<usize> = (0..ds.len()).collect();
        let features: Vec<usize> = (0..ds.feature_count()).collect();
        let candidates = all_candidates(&ds, &rows);
        let best_gain = candidates
            .iter()
            .map(|c| c.2)
            .fold(f64::NEG_INFINITY, f64::max);
        match best_split(&ds, &rows, &features) {
            None => assert!(
                candidates.is_empty() || best_gain <= 1e-12,
                "missed gain {best_gain}"
            ),
            Some(s) => {
                assert!((s.gain - best_gain).abs() <= 1e-12);
                let (f, t, g) = candidates
                    .iter()
                    .copied()
                    .find(|c| c.2 >= best_gain - 1e-12)
                    .unwrap();
                assert_eq!((s.feature, s.threshold), (f, t), "gain {g}");
            }
        }
    }
}

#[test]
fn best_split_on_row_subsets_and_feature_subsets() {
    let mut r = rng(3);
    for _ in 0..200 {
        let ds = random_dataset(&mut r, 40, 5);
        let rows: Vec<usize> = (0..ds.len()).filter(|_| r.random_bool(0.6)).collect();
        if rows.len() < 2 {
            continue;
        }
        let f = r.random_range(0..ds.feature_count());
        let got = best_split(&ds, &rows, &[f]);
        let best = all_candidates(&ds, &rows)
            .into_iter()
            .filter(|c| c.0 == f)
            .fold(None::<(usize, f64, f64)>, |acc, c| match acc {
                Some(a) if a.2 >= c.2 - 1e-12 => Some(a),
                _ => Some(c),
            });
        match (got, best) {
            (Some(s), Some(b)) => assert_eq!((s.feature, s.threshold), (b.0, b.1)),
            (None, b) => assert!(b.is_none_or(|b| b.2 <= 1e-12)),
            (Some(s), None) => panic!("split {s:?} where none exists"),
        }
    }
}

fn brute_majority(ds: &Dataset, tree: &DecisionTree, rows: &[usize]) -> BTreeMap<usize, usize> {
    let mut per_leaf: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        per_leaf
            .entry(tree.route(ds.row(r)))
            .or_default()
            .push(ds.label(r));
    }
    per_leaf
        .into_iter()
        .map(|(leaf, labels)| {
            let mut best = (0, usize::MAX);
            for c in 0..ds.class_count() {
                let n = labels.iter().filter(|&&l| l == c).count();
                if n > best.0 {
                    best = (n, c);
                }
            }
            (leaf, best.1)
        })
        .collect()
}

#[test]
fn leaf_adjustment_matches_histograms() {
    let mut r = rng(4);
    for seed in 0..60 {
        let ds = random_dataset(&mut r, 50, 4);
        let all: Vec<usize> = (0..ds.len()).collect();
        let mut tree = DecisionTree::new();
        let params = GrowthParams {
            max_depth: Some(3),
            ..GrowthParams::default()
        };
        grow(&mut tree, &ds, &all, &params, &mut rng(seed));
        let client: Vec<usize> = all.iter().copied().filter(|_| r.random_bool(0.5)).collect();
        assert_eq!(
            adjust_leaves(&tree, &ds, &client),
            brute_majority(&ds, &tree, &client)
        );
        let counts = leaf_class_counts(&tree, &ds, &client);
        assert_eq!(counts.values().flatten().sum::<usize>(), client.len());
    }
}

#[test]
fn node_stats_match_recursive_count() {
    let mut r = rng(5);
    for _ in 0..50 {
        let forest: Vec<_> = (0..r.random_range(1..6))
            .map(|_| random_shape(&mut r, 12))
            .collect();
        let counts: Vec<_> = forest.iter().map(|t| recursive_counts(t, 0)).collect();
        let n = forest.len() as f64;
        let stats = node_stats(&forest).unwrap();
        assert_eq!(
            stats.mean_nodes,
            counts.iter().map(|c| c.0 as f64).sum::<f64>() / n
        );
        assert_eq!(
            stats.mean_leaves,
            counts.iter().map(|c| c.1 as f64).sum::<f64>() / n
        );
        assert_eq!(
            stats.mean_max_depth,
            counts.iter().map(|c| c.2 as f64).sum::<f64>() / n
        );
        for (t, c) in forest.iter().zip(&counts) {
            let shape = TreeShape::of(t);
            assert_eq!((shape.nodes, shape.leaves, shape.max_depth), *c);
            assert_eq!(shape.nodes, t.node_count());
        }
    }
}

#[test]
fn first_position_is_uniform_over_clients() {
    let (m, k) = (1000, 10);
    let schedule = init_schedule(m, k, 2024).unwrap();
    let mut first = vec![0usize; k];
    for order in &schedule.per_tree_order {
        first[order[0]] += 1;
    }
    let p = 1.0 / k as f64;
    let mean = m as f64 * p;
    let sigma = (m as f64 * p * (1.0 - p)).sqrt();
    for (client, &n) in first.iter().enumerate() {
        assert!(
            (n as f64 - mean).abs() <= 4.0 * sigma,
            "client {client} first {n} times"
        );
    }
}
