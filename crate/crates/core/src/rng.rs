//! Seeded random streams.
//!
//! Each run derives independent ChaCha substreams from one seed so that
//! drawing extra numbers in one place (say, a Lipschitz probe) never shifts
//! the gradient samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Oracle = 1,
    LipschitzProbe = 2,
    ProblemGeneration = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
