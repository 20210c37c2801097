//! Reproducible random streams.
//!
//! Each stream is a ChaCha8 keystream keyed by the run seed and selected by a
//! stream index (one per replicate); the draw index is the keystream
//! position. Streams are therefore independent of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` of run `seed`, positioned at draw 0.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
