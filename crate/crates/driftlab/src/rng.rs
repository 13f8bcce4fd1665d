//! Counter-based random streams.
//!
//! Every consumer of randomness derives an independent ChaCha8 stream from
//! `(seed, stream id)`. Streams never share state, so work can be distributed
//! across threads in any order without changing a single drawn number; the
//! reproducibility contract (identical seed implies identical output bytes)
//! reduces to using stable stream ids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// One independent stream of the counter-based generator.
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    /// Stream `stream` of the generator family keyed by `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        StreamRng { inner }
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}
