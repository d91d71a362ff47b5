//! Seed derivation for independent, reproducible random streams.
//!
//! Every random decision in the simulator draws from a `ChaCha8Rng` whose
//! seed is derived from a master seed plus a domain tag and a path of
//! indices (tree, iteration, client, row...). Streams therefore never depend
//! on the order in which jobs are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tags keep streams for unrelated purposes apart even when their
/// index paths coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Split = 1,
    Partition = 2,
    Schedule = 3,
    TreeGrowth = 4,
    TieBreak = 5,
    Run = 6,
    Model = 7,
    Evaluation = 8,
    ClientTrees = 9,
    Validation = 10,
    Synthetic = 11,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix `seed`, `domain` and `path` into a new 64-bit seed.
pub fn derive_seed(seed: u64, domain: Domain, path: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(domain as u64));
    for &p in path {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0xA076_1D64_78BD_642F)));
    }
    h
}

pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, domain: Domain, path: &[u64]) -> StreamRng {
    seeded(derive_seed(seed, domain, path))
}

/// Stream used to grow tree `tree` during growth iteration `iteration`
/// (1-based). Standalone forests use iteration 1 so that a single-client
/// federation matches them tree for tree.
pub fn tree_stream(master_seed: u64, tree: usize, iteration: usize) -> StreamRng {
    stream(
        master_seed,
        Domain::TreeGrowth,
        &[tree as u64, iteration as u64],
    )
}
