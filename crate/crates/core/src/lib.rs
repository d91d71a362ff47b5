//! Collaborative federated random forest.
//!
//! Every tree in the ensemble is grown in turn by all simulated clients,
//! following a per-tree client permutation. Leaves are then filled with the
//! majority label each client observes there, and prediction is a majority
//! vote over the concatenated label lists of the reached leaves.
//!
//! The crate also carries the comparison models (centralized RF, a
//! non-collaborative federated forest, collaborative growth with
//! class-probability leaves, and per-client top-tree selection), the IID and
//! α-chunking partitioners, and the experiment harness used by the CLI.

pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod federation;
pub mod rng;
pub mod synth;
pub mod tree;

pub use error::{Error, Result};
