//! Deterministic, platform-independent random streams.
//!
//! Every random object (disorder instance, bitstring, scrambler, Haar state)
//! is drawn from a ChaCha8 stream keyed by a 64-bit seed. Ensembles derive
//! per-item seeds from `(master, index)` with [`derive_seed`], so the result
//! for item `i` never depends on which worker ran it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th item of an ensemble keyed by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Independent named substream of a seed, e.g. the bitstring stream of an
/// instance versus its coupling stream.
pub fn substream(seed: u64, tag: &str) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325u64;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix64(seed ^ h)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
