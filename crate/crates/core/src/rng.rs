//! Deterministic random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha stream selected by the
//! trial index, so results do not depend on how trials are scheduled across
//! threads. The last stream of each seed is reserved for codebook generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream index reserved for codebook construction.
pub const CODEBOOK_STREAM: u64 = u64::MAX;

/// Generator for a single call seeded directly.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for trial `index` under `master_seed`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    debug_assert!(index != CODEBOOK_STREAM);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Generator for codebook bin `bin` (0-based) under `seed`.
///
/// Bins are spread over the high half of the stream space so they never
/// collide with trial streams.
pub fn codebook_rng(seed: u64, bin: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CODEBOOK_STREAM - bin);
    rng
}
