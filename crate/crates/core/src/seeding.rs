//! Deterministic derivation of independent RNG streams from a base seed and
//! integer tags, so parallel work never shares or reorders draws.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with two tags (e.g. component-count and restart index,
/// or pixel and component index) into a well-separated stream seed.
pub(crate) fn mix_seed(base: u64, tag_a: u64, tag_b: u64) -> u64 {
    splitmix64(splitmix64(base ^ tag_a.wrapping_mul(0xA076_1D64_78BD_642F)) ^ tag_b)
}
