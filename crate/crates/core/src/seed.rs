//! Counter-based seed splitting.
//!
//! A base seed plus a stream counter selects an independent ChaCha stream, so
//! Monte Carlo trials, sweep rows and the per-frame random sources never share
//! state and can run in any order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of base seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A fresh 64-bit seed for stream `stream` of base seed `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    stream_rng(seed, stream).next_u64()
}
