//! Reproducible random streams.
//!
//! Every sample index gets its own ChaCha stream derived from one master seed,
//! so an ensemble sweep produces the same values no matter how the samples are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator handed to every sampling routine.
pub type Stream = ChaCha12Rng;

/// Factory of independent counter-based streams keyed by an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    seed: u64,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream number `index`. Streams with different indices never overlap.
    pub fn stream(&self, index: u64) -> Stream {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// A factory for a sub-experiment; `tag` separates e.g. the initial
    /// matrices from the noise used to evolve them.
    pub fn derive(&self, tag: u64) -> StreamFactory {
        // splitmix64 finaliser keeps nearby tags far apart
        let mut z = self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        StreamFactory::new(z ^ (z >> 31))
    }
}
