//! Seeded random streams.
//!
//! Every stochastic component draws from its own ChaCha stream so that, for a
//! fixed seed, results do not depend on the order in which components consume
//! randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream identifiers. Distinct purposes never share a stream.
pub mod stream {
    pub const ORDERING: u64 = 1;
    pub const INIT: u64 = 2;
    pub const DROPOUT: u64 = 3;
    pub const REHEARSAL: u64 = 4;
    pub const BUFFER: u64 = 5;
    pub const SYNTH: u64 = 6;
    pub const OFFLINE: u64 = 7;
}

/// A generator for `(seed, stream)`; `stream` selects an independent sequence.
pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Like [`seeded`] but with an extra index folded into the stream id, e.g. a
/// class label or an epoch number.
pub fn seeded_sub(seed: u64, stream: u64, index: u64) -> Rng {
    seeded(
        seed,
        stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index.wrapping_add(1),
    )
}
