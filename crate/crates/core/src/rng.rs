//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a
//! master seed mixed with a stream index, so results never depend on the
//! order in which reads or instances are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Streams that share a master seed but must stay independent (the
/// embedder and the sampler of one instance, say) use different domains.
pub fn derive_seed_in(master: u64, domain: u64, index: u64) -> u64 {
    derive_seed(derive_seed(master, domain), index)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
