//! Seedable, splittable random streams.
//!
//! A [`RandomStream`] is identified by a `(seed, stream_id)` pair and is backed
//! by the ChaCha8 block function, which is counter based: every stream id
//! selects a disjoint keystream of length 2^64 blocks. Monte Carlo runs assign
//! one stream per chunk of samples, so results do not depend on how many
//! worker threads execute the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_core::{Error as RngError, RngCore};

#[derive(Clone, Debug)]
pub struct RandomStream {
    inner: ChaCha8Rng,
}

impl RandomStream {
    /// Stream `stream_id` of the generator seeded with `seed`.
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { inner }
    }

    /// Shorthand for stream 0.
    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.inner.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform integer in `[1, n]`.
    #[inline]
    pub fn uniform_index(&mut self, n: usize) -> usize {
        use rand::Rng;
        self.gen_range(1..=n)
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), RngError> {
        self.inner.try_fill_bytes(dest)
    }
}
