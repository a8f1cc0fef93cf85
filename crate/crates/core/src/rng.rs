//! Deterministic random streams.
//!
//! Every pair gets its own ChaCha stream keyed by the run seed, so results do
//! not depend on how pairs are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent sub-stream roles for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    /// Screen impact position.
    Impact = 0,
    /// Slit tag, splitter decisions, coin flips.
    Routing = 1,
}

const ROLES: u64 = 2;

/// Stream for one role of one pair.
pub fn pair_stream(seed: u64, pair_id: u64, role: StreamRole) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair_id.wrapping_mul(ROLES).wrapping_add(role as u64));
    rng
}

/// A run-level stream independent of all pair streams, e.g. for choosing an
/// exact-half destruction subset.
pub fn run_stream(seed: u64, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    rng.set_stream(salt);
    rng
}

/// Stream for replicate `index` of a repeated experiment.
pub fn replicate_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(17) ^ 0xD1B5_4A32_D192_ED03);
    rng.set_stream(index);
    rng
}
