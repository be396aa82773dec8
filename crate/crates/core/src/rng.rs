//! Deterministic random-stream derivation.
//!
//! All randomness in the library flows from a single root seed. Substreams
//! are derived from `(root, purpose-tag, index)` with a splitmix-style hash,
//! so sweeps, trials and parallel workers get independent, reproducible
//! streams regardless of execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type Stream = ChaCha12Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hash_tag(tag: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derive a substream from `(root, purpose-tag, index)`.
pub fn derive(root: u64, tag: &str, index: u64) -> Stream {
    let mut seed = [0u8; 32];
    let a = splitmix64(root);
    let b = splitmix64(a ^ hash_tag(tag));
    let c = splitmix64(b ^ index);
    let d = splitmix64(c);
    seed[0..8].copy_from_slice(&a.to_le_bytes());
    seed[8..16].copy_from_slice(&b.to_le_bytes());
    seed[16..24].copy_from_slice(&c.to_le_bytes());
    seed[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha12Rng::from_seed(seed)
}
