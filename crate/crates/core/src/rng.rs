//! Random number generation.
//!
//! Two generators with different jobs:
//!
//! * [`SplitMix64`] drives instance generation. It is a tiny counter-based
//!   generator with published constants, so instances are reproducible
//!   bit-for-bit across platforms and can be re-derived in any language. The
//!   full algorithm: the 64-bit state advances by the golden-ratio constant
//!   `0x9E3779B97F4A7C15` per draw, and each output is the finalizer
//!   `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//!   z *= 0x94D049BB133111EB; z ^= z >> 31` applied to the new state.
//!   Bounded draws use rejection sampling (see [`SplitMix64::below`]).
//!
//! * [`protocol_rng`] derives seeded ChaCha8 streams for protocol runs. Runs
//!   are keyed by `(master seed, tag words)` so parallel execution over
//!   (instance, seed) pairs stays independent of scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; also used to fold parameter words into seeds.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Counter-based SplitMix64 generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Seed folded from a sequence of parameter words: starting from 0, each
    /// word is XORed into the running state and passed through [`mix64`].
    pub fn from_words(words: &[u64]) -> Self {
        let mut s = 0u64;
        for &w in words {
            s = mix64(s ^ w);
        }
        Self::new(s)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw from `0..bound` by rejection: draws below the largest
    /// multiple of `bound` are reduced, the rest are rejected and redrawn.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound >= 1);
        let limit = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < limit {
                return x % bound;
            }
        }
    }

    /// Uniform draw from the inclusive range `lo..=hi`.
    #[inline]
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        lo + self.below(hi - lo + 1)
    }
}

/// Seeded ChaCha8 stream for one protocol run, keyed by a master seed plus
/// arbitrary tag words (instance id hash, seed index, protocol, depth, ...).
pub fn protocol_rng(master_seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut s = mix64(master_seed ^ 0x6A09_E667_F3BC_C908);
    for &t in tags {
        s = mix64(s ^ t);
    }
    ChaCha8Rng::seed_from_u64(s)
}

/// Hash of an arbitrary string into a tag word, for keying RNG streams.
pub fn tag(s: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
