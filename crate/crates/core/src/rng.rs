//! Deterministic random streams for parallel Monte Carlo.
//!
//! Every work unit `k` of a campaign draws from its own ChaCha8 stream: the key is
//! derived from the master seed, the 64-bit stream id is `k`. Streams are
//! independent of scheduling, so a campaign gives bitwise-identical results for any
//! worker count as long as partial results are reduced in index order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Random stream for work unit `index` of the campaign seeded with `master_seed`.
pub fn stream(master_seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng.set_word_pos(0);
    rng
}

/// Stream for a sub-task of work unit `index`, e.g. the second of two campaigns sharing a seed.
pub fn substream(master_seed: u64, index: u64, lane: u64) -> Stream {
    stream(master_seed ^ lane.wrapping_mul(0x9E37_79B9_7F4A_7C15), index)
}
