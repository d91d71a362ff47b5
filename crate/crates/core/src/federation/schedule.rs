use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// For every tree, the order in which clients grow it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSchedule {
    pub per_tree_order: Vec<Vec<usize>>,
}

impl PermutationSchedule {
    pub fn tree_count(&self) -> usize {
        self.per_tree_order.len()
    }

    pub fn client_count(&self) -> usize {
        self.per_tree_order.first().map_or(0, Vec::len)
    }
}

/// One uniform random permutation of `0..clients` per tree. Tree `t` uses its
/// own stream, so the schedule for a tree does not depend on `trees`.
pub fn init_schedule(trees: usize, clients: usize, seed: u64) -> Result<PermutationSchedule> {
    if clients == 0 || trees < clients {
        return Err(Error::InvalidParameter(format!(
            "need trees >= clients >= 1, got {trees} trees and {clients} clients"
        )));
    }
    let per_tree_order = (0..trees)
        .map(|t| {
            let mut order: Vec<usize> = (0..clients).collect();
            order.shuffle(&mut rng::stream(seed, Domain::Schedule, &[t as u64]));
            order
        })
        .collect();
    Ok(PermutationSchedule { per_tree_order })
}

/// Trees each client grows in iteration `iteration` (1-based): client `i`
/// gets every tree whose permutation has `i` at that position. Indexed by
/// client, tree indices ascending.
pub fn round_assignments(
    schedule: &PermutationSchedule,
    iteration: usize,
) -> Result<Vec<Vec<usize>>> {
    let clients = schedule.client_count();
    if iteration == 0 || iteration > clients {
        return Err(Error::InvalidParameter(format!(
            "iteration {iteration} outside 1..={clients}"
        )));
    }
    let mut groups = vec![Vec::new(); clients];
    for (tree, order) in schedule.per_tree_order.iter().enumerate() {
        groups[order[iteration - 1]].push(tree);
    }
    Ok(groups)
}
