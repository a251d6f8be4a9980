//! Random streams for the simulator.
//!
//! Every random draw comes from a xoshiro256** generator. Independent streams
//! are derived from a parent seed and a stream number with one SplitMix64
//! step:
//!
//! ```text
//! child = splitmix64(parent ^ (stream * 0x9E3779B97F4A7C15)).next_u64()
//! ```
//!
//! The generator for a stream is `Xoshiro256StarStar::seed_from_u64(child)`,
//! which expands the 64-bit seed with SplitMix64 again. A contention link
//! gives device `d` stream `d`; a path gives link `i` stream `i`; a
//! multi-replication run gives replication `r` stream `r`. Results therefore
//! depend only on the seed and the stream numbers, never on execution order.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};

const STREAM_SPREAD: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derive the seed of child stream `stream` from `parent`.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    SplitMix64::seed_from_u64(parent ^ stream.wrapping_mul(STREAM_SPREAD)).next_u64()
}

/// Seed used by replication `index` of a run seeded with `seed`.
pub fn replication_seed(seed: u64, index: u32) -> u64 {
    derive_seed(seed, u64::from(index))
}

#[derive(Debug, Clone)]
pub struct Stream(Xoshiro256StarStar);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn child(parent: u64, stream: u64) -> Self {
        Self::new(derive_seed(parent, stream))
    }

    /// Uniform integer in `[0, 2^exponent - 1]`, taken from the top bits of
    /// one 64-bit output. Always consumes exactly one output.
    pub fn window(&mut self, exponent: u8) -> u64 {
        debug_assert!(exponent <= 63);
        let raw = self.0.next_u64();
        if exponent == 0 {
            0
        } else {
            raw >> (64 - u32::from(exponent))
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
}
