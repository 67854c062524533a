use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// Seeded uniform random stream.
///
/// Backed by ChaCha20, so a given `(seed, stream)` pair yields the same
/// sequence on every platform. Independent sub-streams (one per
/// trajectory, say) are derived with [`RandomStream::substream`].
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RandomStream {
    /// Identifier of the generator algorithm, recorded in run manifests.
    pub const ALGORITHM: &'static str = "chacha20";

    /// Stream 0 for `seed`.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream index within the seed.
    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh, independent stream for `index` under the same seed. The
    /// result does not depend on how much of `self` has been consumed.
    pub fn substream(&self, index: u64) -> Self {
        Self::with_stream(self.seed, index)
    }

    /// Raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        // 53 random mantissa bits, offset by half an ulp so 0 is excluded.
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}
