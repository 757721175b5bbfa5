//! Deterministic seed derivation.
//!
//! Every random stream is identified by a base seed and a path of integer
//! tags (point index, chain index, stage, ...). The derived seed is obtained
//! by folding the tags into the base with the SplitMix64 finalizer:
//!
//! ```text
//! s₀ = splitmix(base)
//! s_{k+1} = splitmix(s_k ⊕ splitmix(tag_k + 0x9E3779B97F4A7C15))
//! ```
//!
//! so that distinct tag paths give unrelated seeds and the scheme can be
//! reproduced from the manifest alone.

use rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the stream identified by `tags` under `base`.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(base);
    for &t in tags {
        s = splitmix64(s ^ splitmix64(t.wrapping_add(GOLDEN)));
    }
    s
}

/// Generator used by every Monte Carlo chain.
pub type ChainRng = Xoshiro256PlusPlus;

pub fn chain_rng(seed: u64) -> ChainRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}
