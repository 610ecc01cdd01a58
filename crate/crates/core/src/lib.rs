//! Template protection on the unit sphere.
//!
//! A template `t ∈ S^(n-1)` is enrolled by drawing a random codeword `c` from
//! a sparse ternary spherical code, building a hidden orthogonal matrix `P`
//! with `P·t = c`, and storing only `(SHA-256(c), P)`. A probe `t'` verifies
//! when `decode(P·t')` hashes to the stored digest. Because `P` is an
//! isometry, the decision depends only on the angle between `t` and `t'`.

pub mod attacks;
pub mod centering;
pub mod cli;
pub mod ecc;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod protection;
pub mod rotation;
pub mod simulation;
pub mod store;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// The seeded generator used throughout the crate and CLI.
pub type SeededRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}
