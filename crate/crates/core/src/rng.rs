//! Deterministic generator construction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every sampler.
pub type Rng = ChaCha8Rng;

/// Generator seeded by a master seed alone.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for one replica, derived from the master seed and the replica index.
pub fn replica(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}
