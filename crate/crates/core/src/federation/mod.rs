//! The collaborative training protocol.
//!
//! 1. The server draws a client permutation per tree.
//! 2. Growth: in iteration `h`, client `i` grows every tree that has `i` at
//!    position `h` of its permutation. After `k` iterations every tree has
//!    been grown once by every client. Leaves stay empty.
//! 3. Adjustment: every client routes its whole shard through every tree
//!    and reports the majority label per reached leaf. The server stores
//!    the reported labels per leaf as the list `L`.

mod audit;
mod protocol;
mod schedule;

pub use audit::{AdjustmentRecord, AuditLog, Direction, GrowthRecord, Phase, WireMessage};
pub use protocol::{collect_leaf_reports, run_adjustment_phase, run_growth_phase, LeafReports};
pub use schedule::{init_schedule, round_assignments, PermutationSchedule};

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PartitionPlan};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use crate::tree::{DecisionTree, GrowthParams, LabelList, Node, WireTree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FederationConfig {
    pub trees: usize,
    pub clients: usize,
    pub growth: GrowthParams,
    pub master_seed: u64,
}

impl FederationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clients == 0 || self.trees < self.clients {
            return Err(Error::InvalidParameter(format!(
                "need trees >= clients >= 1, got {} trees and {} clients",
                self.trees, self.clients
            )));
        }
        Ok(())
    }

    pub fn schedule_seed(&self) -> u64 {
        rng::derive_seed(self.master_seed, Domain::Schedule, &[])
    }
}

/// The trained collaborative forest: leaves hold the per-client majority
/// labels `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub class_count: usize,
    pub config: FederationConfig,
    pub schedule: PermutationSchedule,
    pub trees: Vec<DecisionTree<LabelList>>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleWire {
    class_count: usize,
    config: FederationConfig,
    schedule: PermutationSchedule,
    trees: Vec<WireTree>,
}

impl EnsembleModel {
    /// Every label list is at most `k` long and holds valid class ids, and
    /// every tree has at least one non-empty leaf.
    pub fn check_invariants(&self) -> Result<()> {
        for (t, tree) in self.trees.iter().enumerate() {
            let mut any = false;
            for node in tree.nodes() {
                if let Node::Leaf(labels) = node {
                    if labels.len() > self.config.clients {
                        return Err(Error::Invariant(format!(
                            "tree {t}: leaf list longer than k"
                        )));
                    }
                    if labels.iter().any(|&l| l >= self.class_count) {
                        return Err(Error::Invariant(format!(
                            "tree {t}: invalid class id in leaf list"
                        )));
                    }
                    any |= !labels.is_empty();
                }
            }
            if !any {
                return Err(Error::Invariant(format!("tree {t} has no populated leaf")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let wire = EnsembleWire {
            class_count: self.class_count,
            config: self.config.clone(),
            schedule: self.schedule.clone(),
            trees: self.trees.iter().map(DecisionTree::to_wire).collect(),
        };
        serde_json::to_string(&wire).expect("ensemble serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let wire: EnsembleWire = serde_json::from_str(json)?;
        let trees = wire
            .trees
            .iter()
            .map(DecisionTree::from_wire)
            .collect::<Result<Vec<_>>>()?;
        let model = Self {
            class_count: wire.class_count,
            config: wire.config,
            schedule: wire.schedule,
            trees,
        };
        model.check_invariants()?;
        Ok(model)
    }
}

/// Full protocol: schedule, growth phase, adjustment phase.
pub fn train(
    config: &FederationConfig,
    ds: &Dataset,
    plan: &PartitionPlan,
) -> Result<EnsembleModel> {
    train_audited(config, ds, plan, false).map(|(model, _)| model)
}

/// [`train`], also returning the audit log. With `capture_wire` the log
/// holds every serialized message exchanged.
pub fn train_audited(
    config: &FederationConfig,
    ds: &Dataset,
    plan: &PartitionPlan,
    capture_wire: bool,
) -> Result<(EnsembleModel, AuditLog)> {
    config.validate()?;
    config.growth.validate(ds.feature_count())?;
    let schedule = init_schedule(config.trees, config.clients, config.schedule_seed())?;
    let (trees, mut audit) = run_growth_phase(config, &schedule, ds, &plan.shards, capture_wire)?;
    let (model, adjust_audit) =
        run_adjustment_phase(config, &schedule, trees, ds, &plan.shards, capture_wire)?;
    audit.adjustment = adjust_audit.adjustment;
    audit.wire.extend(adjust_audit.wire);
    Ok((model, audit))
}
