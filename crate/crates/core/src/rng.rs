//! Reproducible random streams.
//!
//! Every AMS realization owns one sequential stream derived from the pair
//! (master seed, realization index). ChaCha's 64-bit stream id gives 2^64
//! non-overlapping streams per key, so realizations never share randomness
//! and results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream used by every simulation routine.
pub type Stream = ChaCha8Rng;

/// Stream for realization `index` under `seed`.
pub fn stream_for(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
