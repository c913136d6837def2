//! Reproducible random streams.
//!
//! Every replication draws from its own ChaCha8 stream selected by
//! `(master seed, stream index)`, so results do not depend on the order in
//! which replications run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for replication `index` under `master`.
pub fn stream(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Derives an unrelated master seed from `master` and a tag (splitmix64
/// finalizer over the mixed inputs).
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
