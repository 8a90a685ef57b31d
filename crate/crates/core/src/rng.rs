//! Counter-style random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream whose seed is
//! derived from a tuple of integer keys (run seed, device, model hash,
//! individual, generation, ...). Results therefore do not depend on the
//! order in which independent work items are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream selectors, so that e.g. the fleet simulator and the sampler
/// never share a stream for the same numeric keys.
pub mod domain {
    pub const FLEET: u64 = 0x01;
    pub const MEASURE: u64 = 0x02;
    pub const SAMPLE: u64 = 0x03;
    pub const NCS_INIT: u64 = 0x04;
    pub const NCS_OFFSPRING: u64 = 0x05;
    pub const NCS_LAMBDA: u64 = 0x06;
    pub const PIPELINE: u64 = 0x07;
    pub const MODEL: u64 = 0x08;
    pub const TIMING: u64 = 0x09;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a key tuple into a single 64-bit seed.
pub fn derive_key(keys: &[u64]) -> u64 {
    keys.iter()
        .fold(0x6A09_E667_F3BC_C909, |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// Independent random stream for a key tuple.
pub fn stream(keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_key(keys))
}

/// FNV-1a over bytes; stable across platforms and compiler versions.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}
