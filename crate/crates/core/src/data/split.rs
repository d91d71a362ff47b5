use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Disjoint train/test row indices, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainTestSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per class, shuffle that class's rows and send the first
/// `⌊(1 − test_fraction)·n_class⌋` to train, the rest to test.
pub fn stratified_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<TrainTestSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let all: Vec<usize> = (0..ds.len()).collect();
    let mut rng = rng::seeded(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut rows) in ds.rows_by_class(&all).into_iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::ClassTooSmall {
                class,
                rows: rows.len(),
                required: 2,
            });
        }
        rows.shuffle(&mut rng);
        let n_train = train_count(rows.len(), test_fraction);
        train.extend_from_slice(&rows[..n_train]);
        test.extend_from_slice(&rows[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(TrainTestSplit { train, test })
}

/// `⌊(1 − f)·n⌋`, nudged so that products like `0.8 · 5` which land a hair
/// below an integer still floor to it.
fn train_count(n: usize, test_fraction: f64) -> usize {
    (((1.0 - test_fraction) * n as f64) + 1e-9).floor() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(class_sizes: &[usize]) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, &n) in class_sizes.iter().enumerate() {
            for i in 0..n {
                rows.push(vec![i as f64, c as f64]);
                labels.push(c);
            }
        }
        Dataset::from_rows(rows, labels).unwrap()
    }

    #[test]
    fn ten_row_class_goes_eight_two() {
        let ds = dataset(&[10, 10]);
        let split = stratified_split(&ds, 0.2, 1).unwrap();
        assert_eq!(ds.class_histogram(&split.train), vec![8, 8]);
        assert_eq!(ds.class_histogram(&split.test), vec![2, 2]);
    }

    #[test]
    fn four_classes_of_25() {
        // per-class floor(0.8 * 25) = 20, so 4 * 20 train and 4 * 5 test
        let ds = dataset(&[25, 25, 25, 25]);
        let split = stratified_split(&ds, 0.2, 9).unwrap();
        assert_eq!(split.train.len(), 80);
        assert_eq!(split.test.len(), 20);
    }

    #[test]
    fn deterministic_and_disjoint() {
        let ds = dataset(&[13, 7, 22]);
        let a = stratified_split(&ds, 0.2, 5).unwrap();
        let b = stratified_split(&ds, 0.2, 5).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
        let c = stratified_split(&ds, 0.2, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn floors_per_class() {
        for n in 2..60 {
            let ds = dataset(&[n, 3]);
            let split = stratified_split(&ds, 0.2, n as u64).unwrap();
            assert_eq!(ds.class_histogram(&split.train)[0], (n * 8) / 10, "n = {n}");
        }
    }

    #[test]
    fn tiny_class_is_rejected() {
        let ds = dataset(&[5, 1]);
        assert!(matches!(
            stratified_split(&ds, 0.2, 0),
            Err(Error::ClassTooSmall {
                class: 1,
                rows: 1,
                ..
            })
        ));
        assert!(stratified_split(&ds, 1.0, 0).is_err());
    }
}
