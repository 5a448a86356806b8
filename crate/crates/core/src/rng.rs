//! Seeded random streams.
//!
//! Every random object in the crate is drawn from a ChaCha20 stream keyed by a
//! 64-bit seed. A seed expands into 2^64 independent streams through the
//! ChaCha stream id, so sub-tasks (operator entries, noise, Monte-Carlo trial
//! `i`) get disjoint streams without coordinating:
//!
//! * [`stream`]`(seed, id)` opens stream `id` of `seed`.
//! * [`derive_seed`]`(seed, index)` is the first word of stream
//!   `TRIAL_STREAM_BASE + index`, used whenever a sub-task needs a seed of its
//!   own (for instance to build a fresh sensing operator per trial).
//!
//! ChaCha is a counter-based generator, so output is identical on every
//! platform and independent of how trials are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Stream ids for the named purposes inside one seed.
pub mod streams {
    pub const OPERATOR: u64 = 0;
    pub const NOISE: u64 = 1;
    pub const SIGNAL: u64 = 2;
    pub const SOLVER: u64 = 3;
    pub const SUPPORT: u64 = 4;
}

const TRIAL_STREAM_BASE: u64 = 1 << 32;

pub type Rng = ChaCha20Rng;

pub fn stream(seed: u64, id: u64) -> Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn derive_seed(seed: u64, index: u64) -> u64 {
    stream(seed, TRIAL_STREAM_BASE.wrapping_add(index)).next_u64()
}
