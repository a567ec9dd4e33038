//! Reproducible per-replication normal streams.
//!
//! Each replication owns a ChaCha20 stream keyed by the master seed and
//! selected by the replication index, so results do not depend on the order
//! or thread in which replications run. Normals are produced by inversion:
//! `Z = -√2 · erfc⁻¹(2U)` with `U` uniform on the open unit interval built from
//! the top 53 bits of one 64-bit word.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::function::erf::erfc_inv;

/// Identifies one replication's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replication: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replication: u64) -> Self {
        Self {
            master_seed,
            replication,
        }
    }
}

pub struct NormalStream {
    rng: ChaCha20Rng,
}

/// Deterministic stream for `seed`.
pub fn derive_stream(seed: SeedSpec) -> NormalStream {
    let mut rng = ChaCha20Rng::seed_from_u64(seed.master_seed);
    rng.set_stream(seed.replication);
    rng.set_word_pos(0);
    NormalStream { rng }
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

impl NormalStream {
    /// Uniform on `(0, 1)`, never 0 or 1.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        -std::f64::consts::SQRT_2 * erfc_inv(2.0 * self.next_uniform())
    }

    pub fn fill_normals(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.next_normal();
        }
    }
}
