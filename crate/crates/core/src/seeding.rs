//! Per-realization seed derivation.
//!
//! Every random draw in a run is keyed by `(master_seed, stream, index)`, so a
//! realization produces the same numbers whichever worker picks it up.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams used by one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStream {
    NoiseProfile,
    WaveplateLattice,
}

impl SeedStream {
    fn tag(self) -> u64 {
        match self {
            SeedStream::NoiseProfile => 0x6e6f_6973_6500_0001,
            SeedStream::WaveplateLattice => 0x6c61_7474_6963_0002,
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, stream: SeedStream, index: u64) -> u64 {
    mix(mix(master_seed ^ stream.tag()).wrapping_add(index))
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
