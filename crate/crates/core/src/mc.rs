//! Deterministic seeded sampling for Monte Carlo runs and property checks.
//!
//! Streams are keyed by `(seed, chunk)`: every chunk owns an independent
//! generator, so chunked runs merge to the same result no matter how the
//! chunks are scheduled, and identical seeds reproduce byte-identical output.

use num_bigint::BigInt;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::Dyadic;
use crate::rational::Rational;

pub struct SampleStream {
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64, chunk: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&chunk.to_le_bytes());
        key[16..24].copy_from_slice(b"udm1-mcs");
        SampleStream {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform dyadic on the `2^-bits` grid in `[0, 1)`.
    pub fn next_unit_dyadic(&mut self, bits: u32) -> Dyadic {
        let mut acc = BigInt::from(0u8);
        let mut remaining = bits;
        while remaining > 0 {
            let take = remaining.min(64);
            let word = self.rng.next_u64() >> (64 - take);
            acc = (acc << take) + BigInt::from(word);
            remaining -= take;
        }
        Dyadic::new(acc, -(bits as i64))
    }

    pub fn next_unit_rational(&mut self, bits: u32) -> Rational {
        self.next_unit_dyadic(bits).to_rational()
    }

    /// Uniform integer in `[0, n)`.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        // Rejection sampling on the top multiple of n.
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }
}
