//! Stable seed derivation.
//!
//! Per-item seeds are FNV-1a over the little-endian master seed followed by
//! the item key, finished with the SplitMix64 mixer. The value depends only on
//! its inputs, never on process, platform or hash-map state.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one item (image, scene) under a master seed.
pub fn derive_seed(master: u64, key: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in master.to_le_bytes().iter().chain(key.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(h)
}

/// Seed for the `index`-th item of a numbered batch.
pub fn derive_indexed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}
