//! Counter-based random substreams.
//!
//! Every replicate or Monte Carlo job gets its own ChaCha8 stream keyed by
//! `(master seed, index)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn substream(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// A nested stream: `(master, outer, inner)` -> independent generator.
pub fn substream2(master: u64, outer: u64, inner: u64) -> ChaCha8Rng {
    let mixed = master ^ outer.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    substream(mixed, inner)
}
