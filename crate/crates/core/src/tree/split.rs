use crate::data::Dataset;
use crate::error::{Error, Result};

/// Gains closer than this are treated as equal, so that floating-point
/// noise cannot override the lowest-feature/lowest-threshold tie rule.
pub(crate) const GAIN_EPS: f64 = 1e-12;

/// Shannon entropy, in bits, of a class-count vector.
pub fn entropy(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    Ok(entropy_of(class_counts, total))
}

#[inline]
pub(crate) fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Best information-gain split of `rows` over `features`.
///
/// Thresholds are midpoints between consecutive distinct values. Returns
/// `None` when no feature has two distinct values or the best gain is not
/// positive. Ties go to the lowest feature index, then the lowest threshold.
pub fn best_split(ds: &Dataset, rows: &[usize], features: &[usize]) -> Option<SplitCandidate> {
    if rows.len() < 2 {
        return None;
    }
    let classes = ds.class_count();
    let n = rows.len();
    let mut parent = vec![0usize; classes];
    for &r in rows {
        parent[ds.label(r)] += 1;
    }
    let parent_entropy = entropy_of(&parent, n);
    if parent_entropy == 0.0 {
        return None;
    }

    let mut order: Vec<usize> = features.to_vec();
    order.sort_unstable();
    order.dedup();

    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0usize; classes];
    let mut right = vec![0usize; classes];
    let mut best: Option<SplitCandidate> = None;

    for &feature in &order {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (ds.value(r, feature), ds.label(r))));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs[0].0 == pairs[n - 1].0 {
            continue;
        }
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(&parent);
        for i in 0..n - 1 {
            let (value, label) = pairs[i];
            left[label] += 1;
            right[label] -= 1;
            let next = pairs[i + 1].0;
            if value == next {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            let children = (n_left as f64 * entropy_of(&left, n_left)
                + n_right as f64 * entropy_of(&right, n_right))
                / n as f64;
            let gain = parent_entropy - children;
            if best.is_none_or(|b| gain > b.gain + GAIN_EPS) {
                best = Some(SplitCandidate {
                    feature,
                    threshold: midpoint(value, next),
                    gain,
                });
            }
        }
    }
    best.filter(|b| b.gain > GAIN_EPS)
}

/// Midpoint of `lo < hi` that still separates them under the `<=` rule.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi && mid >= lo {
        mid
    } else {
        lo
    }
}
