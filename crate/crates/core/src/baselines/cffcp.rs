use std::collections::BTreeMap;

use super::{normalize_counts, ProbabilityForest};
use crate::data::{Dataset, PartitionPlan};
use crate::error::Result;
use crate::federation::{
    collect_leaf_reports, init_schedule, run_growth_phase, AuditLog, FederationConfig,
};
use crate::tree::leaf_class_counts;

/// Collaborative growth (same code path and seeds as [`crate::federation::train`]),
/// then each client reports class frequencies per leaf; the server sums
/// them and normalizes to probabilities. Leaves nobody reached abstain.
pub fn train_cffcp(
    config: &FederationConfig,
    ds: &Dataset,
    plan: &PartitionPlan,
) -> Result<ProbabilityForest> {
    train_cffcp_audited(config, ds, plan, false).map(|(forest, _)| forest)
}

pub fn train_cffcp_audited(
    config: &FederationConfig,
    ds: &Dataset,
    plan: &PartitionPlan,
    capture_wire: bool,
) -> Result<(ProbabilityForest, AuditLog)> {
    config.validate()?;
    config.growth.validate(ds.feature_count())?;
    let schedule = init_schedule(config.trees, config.clients, config.schedule_seed())?;
    let (trees, mut audit) = run_growth_phase(config, &schedule, ds, &plan.shards, capture_wire)?;
    let (reports, adjust_audit) =
        collect_leaf_reports(&trees, ds, &plan.shards, capture_wire, leaf_class_counts)?;
    audit.adjustment = adjust_audit.adjustment;
    audit.wire.extend(adjust_audit.wire);

    let classes = ds.class_count();
    let trees = trees
        .iter()
        .zip(&reports)
        .map(|(tree, per_client)| {
            let mut totals: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for report in per_client {
                for (&leaf, counts) in report {
                    let sum = totals.entry(leaf).or_insert_with(|| vec![0; classes]);
                    for (s, c) in sum.iter_mut().zip(counts) {
                        *s += c;
                    }
                }
            }
            tree.map_leaves(|leaf, _| {
                totals
                    .get(&leaf)
                    .map(|c| normalize_counts(c))
                    .unwrap_or_default()
            })
        })
        .collect();
    Ok((
        ProbabilityForest {
            class_count: classes,
            trees,
        },
        audit,
    ))
}
