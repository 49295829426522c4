//! Counter-derived random streams.
//!
//! Every Monte Carlo trial and every field trajectory draws from its own
//! ChaCha8 stream, selected by `(master seed, domain, index)`. Results
//! therefore do not depend on the order or the thread in which trials run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the streams used by different simulations sharing one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    IonPlacement = 0x10,
    FieldTrajectory = 0x20,
    Noise = 0x30,
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream number `index` of `domain` under `master_seed`.
pub fn stream(master_seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(master_seed ^ mix(domain as u64)));
    rng.set_stream(index);
    rng
}
