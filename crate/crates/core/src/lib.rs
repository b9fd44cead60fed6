//! Event attendance prediction from post text and social-graph structure.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`] holds the undirected social graph, edge-list I/O and the
//!   artificial grouping of attendees that arrived without friends.
//! * [`alias`], [`node2vec`], [`harp`] and [`poincare`] produce node
//!   embeddings ([`embedding::EmbeddingMatrix`]).
//! * [`textfeat`] turns posts into sparse uni/bi/trigram count vectors.
//! * [`mlp`] is the single-hidden-layer binary classifier trained with Adam.
//! * [`harness`] glues everything into stratified cross-validation runs,
//!   synthetic data generation, config parsing and report writing.
//!
//! Every stochastic routine takes an explicit `u64` seed and uses a
//! ChaCha8 stream, so single-threaded runs are bit-for-bit reproducible.

pub mod alias;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod harness;
pub mod harp;
pub mod mlp;
pub mod node2vec;
pub mod poincare;
pub mod textfeat;

pub use embedding::EmbeddingMatrix;
pub use error::{Error, Result};
pub use graph::Graph;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic random stream used throughout the crate.
pub type Rng = ChaCha8Rng;

/// ChaCha8 stream seeded from a `u64`.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent child seed, e.g. one per fold or per hierarchy level.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
