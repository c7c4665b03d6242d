//! Deterministic seed derivation.
//!
//! Every generated sample gets its own RNG seed from a stable 64-bit mix of
//! (global seed, case id, class, sample index), so datasets can be extended
//! or regenerated piecewise without disturbing existing samples.

use crate::jamming::JammerClass;

/// SplitMix64 finalizer step.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// FNV-1a hash of a byte string.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xCBF29CE484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001B3);
    }
    h
}

/// Per-sample RNG seed for `(global seed, case, class, index)`.
pub fn sample_seed(global: u64, case_id: &str, class: JammerClass, index: usize) -> u64 {
    let mut s = splitmix64(global);
    s = splitmix64(s ^ fnv1a(case_id.as_bytes()));
    s = splitmix64(s ^ class.index() as u64);
    splitmix64(s ^ index as u64)
}

/// Hash used to order sample indices for the train/test split.
pub fn split_hash(global: u64, index: usize) -> u64 {
    splitmix64(splitmix64(global ^ 0xA5A5_5A5A_F00D_BEEF) ^ index as u64)
}
