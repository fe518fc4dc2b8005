//! Seeding helpers.
//!
//! Every stochastic routine in this crate takes either an explicit `u64`
//! seed or an `impl Rng`, and all internal generators are ChaCha8, so a run
//! is a pure function of its inputs. When work fans out (parallel simulation
//! replicates, one chain per shape-grid value) each task derives its own
//! independent seed from the master seed and a stream index, which keeps
//! results independent of thread scheduling and stable when tasks are added
//! or reordered.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer: a cheap, well-mixed 64-bit permutation.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derive an independent seed for a numbered stream of work.
///
/// Distinct `(seed, stream)` pairs map to well-separated seeds; the same
/// pair always maps to the same seed. Used to give each parallel replicate
/// or grid point its own generator.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// A deterministic generator for the given seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
