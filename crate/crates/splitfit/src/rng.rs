//! Deterministic replication streams.
//!
//! Every Monte Carlo replication `r` draws from an independent stream keyed
//! by `seed ^ r`, so results are reproducible bit-for-bit no matter how the
//! replications are scheduled across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG used for all sampling in this crate.
pub type StreamRng = ChaCha8Rng;

/// RNG for replication `stream` of a run keyed by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed ^ stream)
}
