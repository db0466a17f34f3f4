//! Seedable, splittable random streams.
//!
//! A [`RandomStream`] is a ChaCha8 generator keyed by a 64-bit seed and a
//! stream id. Identical `(seed, stream)` pairs replay identical draws, and
//! distinct stream ids select non-overlapping ChaCha streams, so replicates
//! can be fanned out over threads while staying reproducible.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// A sibling stream with the same seed and a different id.
    pub fn split(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
