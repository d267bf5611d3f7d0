//! Seeded random streams.
//!
//! Every random draw comes from ChaCha8 (`rand_chacha`), which is portable
//! and counter based. A user seed is expanded with `seed_from_u64`; the 64-bit
//! stream id is `(purpose << 32) | index`, where `index` is the run or
//! instance number. Distinct purposes and indices therefore never share a
//! keystream, and a given `(seed, purpose, index)` reproduces the same
//! sequence on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Benchmark instance supports.
    Instance = 1,
    /// Mean-field initialization and sweep noise.
    Anneal = 2,
    /// Random interaction matrices for graph-model checks.
    GraphCheck = 3,
    /// Random non-benchmark instances used in tests and checks.
    RandomInstance = 4,
}

pub fn stream(seed: u64, purpose: Purpose, index: u32) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | index as u64);
    rng
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.gen();
        if x > 0.0 {
            return x;
        }
    }
}
