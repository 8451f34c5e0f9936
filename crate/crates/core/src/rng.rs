//! Deterministic episode random stream.
//!
//! Every stochastic draw the engine makes goes through [`EpisodeRng`], a thin
//! wrapper over ChaCha8 (a counter-based stream cipher generator) keyed only
//! by the episode seed. The draw order at reset is fixed:
//!
//! 1. role assignment: a Fisher-Yates shuffle of player ids; the first
//!    `num_impostors` entries become impostors,
//! 2. colors: a Fisher-Yates shuffle of palette indices,
//! 3. spawn assignment: a Fisher-Yates shuffle of spawn-point indices.
//!
//! Each situation step then draws one shuffle of player ids to order moves.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpisodeRng {
    inner: ChaCha8Rng,
}

impl EpisodeRng {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..bound` by rejection sampling (no modulo bias).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below() needs a positive bound");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform float in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// In-place Fisher-Yates shuffle, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }

    /// Position of the generator in its stream, used for state digests.
    pub fn fingerprint(&self) -> (u64, u128) {
        (self.inner.get_stream(), self.inner.get_word_pos())
    }

    pub fn seed_bytes(&self) -> [u8; 32] {
        self.inner.get_seed()
    }
}

/// Mixes several integers into one seed (splitmix64 finalizer chain).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}
