//! Seed derivation and per-device random streams.
//!
//! Every random quantity in an experiment is drawn from a ChaCha8 generator
//! whose 64-bit seed is derived from the master seed and a key, and whose
//! stream id names what the draws are used for. Streams never share state,
//! so results do not depend on the order in which devices are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used under a device seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Channel realization: imbalance and fading.
    Device = 0,
    /// Transmitted symbols of the block.
    Symbols = 1,
    /// Unit-variance noise of the block.
    Noise = 2,
    /// Network initialization, mini-batches, sampling during training.
    Training = 3,
    /// Symbols of a fresh evaluation block.
    HoldoutSymbols = 4,
    /// Noise of a fresh evaluation block.
    HoldoutNoise = 5,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a sequence of key words into a child seed.
///
/// Stable across platforms and releases: it is part of the reproducibility
/// contract of the results files.
pub fn derive_seed(master: u64, key: &[u64]) -> u64 {
    key.iter().fold(splitmix64(master), |acc, &k| {
        splitmix64(acc ^ splitmix64(k))
    })
}

/// Hashes a short label (e.g. a method name) into a key word.
pub fn label_key(label: &str) -> u64 {
    // FNV-1a
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Opens stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
