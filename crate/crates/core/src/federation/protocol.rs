//! Server-side orchestration of the two training phases.
//!
//! Clients are simulated in-process, but every tree handed to a client and
//! every result handed back goes through its JSON wire form, so the
//! serialized messages are exactly what a real deployment would exchange.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::audit::{AdjustmentRecord, AuditLog, Direction, GrowthRecord, Phase, WireMessage};
use super::schedule::{round_assignments, PermutationSchedule};
use super::{EnsembleModel, FederationConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::tree::{adjust_leaves, grow, DecisionTree, LabelList, NodeId};

pub(crate) fn check_shards(config: &FederationConfig, shards: &[Vec<usize>]) -> Result<()> {
    if shards.len() != config.clients {
        return Err(Error::InvalidParameter(format!(
            "{} shards for {} clients",
            shards.len(),
            config.clients
        )));
    }
    if let Some(client) = shards.iter().position(Vec::is_empty) {
        return Err(Error::EmptyShard { client });
    }
    Ok(())
}

struct GrowJob {
    tree: usize,
    client: usize,
    grown: DecisionTree,
    nodes_before: usize,
    messages: Vec<WireMessage>,
}

/// Grow all trees: in iteration `h` (1..=k) each client grows the trees
/// whose permutation puts it at position `h`, then hands them back to the
/// server. Returned trees carry no leaf data.
pub fn run_growth_phase(
    config: &FederationConfig,
    schedule: &PermutationSchedule,
    ds: &Dataset,
    shards: &[Vec<usize>],
    capture_wire: bool,
) -> Result<(Vec<DecisionTree>, AuditLog)> {
    check_shards(config, shards)?;
    if schedule.tree_count() != config.trees || schedule.client_count() != config.clients {
        return Err(Error::InvalidParameter(
            "schedule does not match the federation size".into(),
        ));
    }
    let mut trees: Vec<DecisionTree> = vec![DecisionTree::new(); config.trees];
    let mut audit = AuditLog::default();

    for iteration in 1..=config.clients {
        let jobs: Vec<(usize, usize)> = round_assignments(schedule, iteration)?
            .into_iter()
            .enumerate()
            .flat_map(|(client, group)| group.into_iter().map(move |tree| (tree, client)))
            .collect();

        let mut done: Vec<GrowJob> = jobs
            .par_iter()
            .map(|&(tree, client)| {
                let outbound = trees[tree].to_json();
                let mut local = DecisionTree::from_json(&outbound)?;
                let mut stream = rng::tree_stream(config.master_seed, tree, iteration);
                let report = grow(&mut local, ds, &shards[client], &config.growth, &mut stream);
                let inbound = local.to_json();
                let grown = DecisionTree::from_json(&inbound)?;
                let messages = if capture_wire {
                    vec![
                        message(
                            Phase::Growth,
                            Some(iteration),
                            Some(client),
                            tree,
                            Direction::ToClient,
                            outbound,
                        ),
                        message(
                            Phase::Growth,
                            Some(iteration),
                            Some(client),
                            tree,
                            Direction::ToServer,
                            inbound,
                        ),
                    ]
                } else {
                    Vec::new()
                };
                Ok(GrowJob {
                    tree,
                    client,
                    grown,
                    nodes_before: report.nodes_before,
                    messages,
                })
            })
            .collect::<Result<_>>()?;

        done.sort_by_key(|j| (j.client, j.tree));
        for job in done {
            if !job.grown.extends(&trees[job.tree]) {
                return Err(Error::Invariant(format!(
                    "client {} altered existing splits of tree {}",
                    job.client, job.tree
                )));
            }
            audit.growth.push(GrowthRecord {
                iteration,
                client: job.client,
                tree: job.tree,
                nodes_before: job.nodes_before,
                nodes_after: job.grown.node_count(),
            });
            audit.wire.extend(job.messages);
            trees[job.tree] = job.grown;
        }
    }
    Ok((trees, audit))
}

fn message(
    phase: Phase,
    iteration: Option<usize>,
    client: Option<usize>,
    tree: usize,
    direction: Direction,
    payload: String,
) -> WireMessage {
    WireMessage {
        phase,
        iteration,
        client,
        tree,
        direction,
        payload,
    }
}

/// Per tree, per client: what that client reported for each leaf it reached.
pub type LeafReports<R> = Vec<Vec<BTreeMap<NodeId, R>>>;

/// Broadcast every grown tree to every client and collect a per-leaf report
/// computed by `report` from the client's full shard.
pub fn collect_leaf_reports<R, F>(
    trees: &[DecisionTree],
    ds: &Dataset,
    shards: &[Vec<usize>],
    capture_wire: bool,
    report: F,
) -> Result<(LeafReports<R>, AuditLog)>
where
    R: Serialize + DeserializeOwned + Send,
    F: Fn(&DecisionTree, &Dataset, &[usize]) -> BTreeMap<NodeId, R> + Sync,
{
    type TreeReports<R> = (
        Vec<BTreeMap<NodeId, R>>,
        Vec<AdjustmentRecord>,
        Vec<WireMessage>,
    );
    let per_tree: Vec<TreeReports<R>> = trees
        .par_iter()
        .enumerate()
        .map(|(t, tree)| {
            let broadcast = tree.to_json();
            let received = DecisionTree::from_json(&broadcast)?;
            let mut reports = Vec::with_capacity(shards.len());
            let mut records = Vec::with_capacity(shards.len());
            let mut messages = Vec::new();
            if capture_wire {
                messages.push(message(
                    Phase::Adjustment,
                    None,
                    None,
                    t,
                    Direction::ToClient,
                    broadcast,
                ));
            }
            for (client, shard) in shards.iter().enumerate() {
                let local = report(&received, ds, shard);
                let payload = serde_json::to_string(&local)?;
                let back: BTreeMap<NodeId, R> = serde_json::from_str(&payload)?;
                if let Some(&bad) = back
                    .keys()
                    .find(|&&leaf| leaf >= tree.node_count() || !tree.is_leaf(leaf))
                {
                    return Err(Error::Invariant(format!(
                        "client {client} reported non-leaf node {bad}"
                    )));
                }
                records.push(AdjustmentRecord {
                    client,
                    tree: t,
                    leaves_reached: back.len(),
                });
                if capture_wire {
                    messages.push(message(
                        Phase::Adjustment,
                        None,
                        Some(client),
                        t,
                        Direction::ToServer,
                        payload,
                    ));
                }
                reports.push(back);
            }
            Ok((reports, records, messages))
        })
        .collect::<Result<_>>()?;

    let mut audit = AuditLog::default();
    let mut all_reports = Vec::with_capacity(trees.len());
    for (reports, records, messages) in per_tree {
        all_reports.push(reports);
        audit.adjustment.extend(records);
        audit.wire.extend(messages);
    }
    audit.adjustment.sort_by_key(|r| (r.client, r.tree));
    Ok((all_reports, audit))
}

/// Leaf adjustment and aggregation: each client reports its majority label
/// per reached leaf; the server stores, per leaf, the reported labels in
/// ascending client order.
pub fn run_adjustment_phase(
    config: &FederationConfig,
    schedule: &PermutationSchedule,
    trees: Vec<DecisionTree>,
    ds: &Dataset,
    shards: &[Vec<usize>],
    capture_wire: bool,
) -> Result<(EnsembleModel, AuditLog)> {
    check_shards(config, shards)?;
    let (reports, audit) = collect_leaf_reports(&trees, ds, shards, capture_wire, adjust_leaves)?;
    let class_count = ds.class_count();
    let trees = trees
        .iter()
        .zip(&reports)
        .map(|(tree, per_client)| {
            tree.map_leaves(|leaf, _| -> LabelList {
                per_client
                    .iter()
                    .filter_map(|r| r.get(&leaf).copied())
                    .collect()
            })
        })
        .collect::<Vec<_>>();
    let model = EnsembleModel {
        class_count,
        config: config.clone(),
        schedule: schedule.clone(),
        trees,
    };
    model.check_invariants()?;
    Ok((model, audit))
}
