//! Brute-force oracles and seeded instance generators for the workspace test
//! suites. Everything here is deliberately independent of the solver
//! implementation: the LP oracle enumerates basic points with its own
//! Gaussian elimination, and the MIP oracle enumerates assignments.

pub mod data;
pub mod lp_oracle;
pub mod mip_oracle;
pub mod models;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for reproducible instances.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
