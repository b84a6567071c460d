//! Seeded random streams.
//!
//! Every randomized operation draws from a ChaCha8 generator built from a
//! 64-bit seed and a stream id, so independent runs can execute in any order
//! (or concurrently) and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for run `run` of grid cell `cell`.
pub fn cell_stream(cell: usize, run: usize) -> u64 {
    ((cell as u64) << 32) | run as u64
}
