//! Deterministic RNG stream derivation.
//!
//! Every source of randomness in a run is a ChaCha12 stream derived from the
//! master seed by the splitting rule below. Streams are independent by
//! construction, so consuming one (e.g. the stratified-batch stream) never
//! perturbs another (e.g. the outer-batch stream). This is what makes the
//! lookahead trainer with `alpha = 0` reproduce the plain-SGD trajectory
//! bit for bit, and what lets Monte-Carlo trials run in any order.
//!
//! Splitting rule: the 32-byte ChaCha seed is
//! `[master_seed (8 LE bytes) | fnv1a64(label) (8 LE bytes) | index (8 LE bytes) | SALT (8 LE bytes)]`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

const SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// FNV-1a, 64-bit. Stable across platforms and releases, unlike `DefaultHasher`.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derives the RNG stream `(label, index)` from a master seed.
pub fn stream(master_seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&fnv1a64(label.as_bytes()).to_le_bytes());
    seed[16..24].copy_from_slice(&index.to_le_bytes());
    seed[24..32].copy_from_slice(&SALT.to_le_bytes());
    ChaCha12Rng::from_seed(seed)
}
