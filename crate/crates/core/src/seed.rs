//! Seed derivation for independent random streams.
//!
//! Every stochastic consumer (population init, per-generation sampling,
//! per-episode environment resets, Monte Carlo chunks) gets its own stream
//! keyed by a purpose tag plus its coordinates. Results therefore do not
//! depend on evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Purpose tags separating otherwise-identical coordinate tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Breed = 2,
    Episode = 3,
    FinalEval = 4,
    Repetition = 5,
    Reeval = 6,
    MonteCarlo = 7,
    Rescore = 8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `master` together with a stream tag and coordinates into a new seed.
pub fn derive_seed(master: u64, stream: Stream, coords: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ splitmix64(stream as u64));
    for &c in coords {
        h = splitmix64(h ^ splitmix64(c.wrapping_add(0x2545_F491_4F6C_DD1D)));
    }
    h
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn derive_rng(master: u64, stream: Stream, coords: &[u64]) -> Rng {
    rng_from_seed(derive_seed(master, stream, coords))
}
