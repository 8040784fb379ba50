//! Seeded randomness.
//!
//! Every random draw in the crate comes from ChaCha20 (`rand_chacha::ChaCha20Rng`)
//! seeded through `SeedableRng::seed_from_u64`. Independent sub-streams, for
//! example one per Monte Carlo trial, select a ChaCha stream id instead of
//! deriving new seeds, so a `(seed, stream)` pair names a reproducible sequence
//! on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Packs two small indices into one stream id.
pub fn stream_id(major: u64, minor: u64) -> u64 {
    (major << 32) ^ minor
}
