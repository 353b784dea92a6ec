//! Seeded random streams. Each consumer draws from its own ChaCha stream so
//! that, for example, changing the weight mode never perturbs the sampled
//! interaction.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Weights = 1,
    Interaction = 2,
    Search = 3,
    Reference = 4,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
