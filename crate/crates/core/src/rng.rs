//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream selected
//! by a `(seed, stream)` pair. ChaCha is counter based, so stream `i` does not
//! depend on how many numbers were pulled from stream `i - 1`, and the output
//! is identical across platforms. Parallel trials index their stream by trial
//! number, never by thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
