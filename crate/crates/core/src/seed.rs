//! Seed derivation.
//!
//! A single global seed fans out into per-component streams with the
//! splitmix64 finalizer, so any stage (a mask draw at epoch 17, a split, a
//! restart of k-means) can be reproduced in isolation:
//!
//! ```text
//! derive(seed, tag)        = splitmix64(seed ^ splitmix64(fnv1a(tag)))
//! derive_at(seed, tag, i)  = splitmix64(derive(seed, tag) + i · 0x9E3779B97F4A7C15)
//! ```

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed of the component named `tag`.
pub fn derive(seed: u64, tag: &str) -> u64 {
    splitmix64(seed ^ splitmix64(fnv1a(tag)))
}

/// Seed of the `index`-th draw of component `tag`.
pub fn derive_at(seed: u64, tag: &str, index: u64) -> u64 {
    splitmix64(derive(seed, tag).wrapping_add(index.wrapping_mul(GAMMA)))
}
