//! Per-index random substreams.
//!
//! Every random draw in the crate comes from `substream(seed, index)`: a
//! ChaCha8 generator keyed by `seed` and positioned on stream `index`. Work
//! item `index` therefore sees the same numbers regardless of how many other
//! items exist, in what order they run, or on how many threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
