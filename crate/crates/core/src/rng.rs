//! Keyed random streams for the Monte-Carlo harness.
//!
//! Every stream is a ChaCha8 generator whose 256-bit key is the tuple
//! `(seed, trial, slot, role)`, so a draw depends only on where it is used and
//! never on the order in which trials are scheduled.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamRole {
    Channel = 1,
    Noise = 2,
    Observation = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub trial: u64,
    pub slot: u64,
    pub role: StreamRole,
}

impl StreamKey {
    pub fn new(seed: u64, trial: u64, slot: u64, role: StreamRole) -> Self {
        Self { seed, trial, slot, role }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.trial.to_le_bytes());
        key[16..24].copy_from_slice(&self.slot.to_le_bytes());
        key[24..].copy_from_slice(&(self.role as u64).to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. CN(0, 1) entries, filled column by column.
pub fn white_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for z in m.iter_mut() {
        *z = complex_normal(rng);
    }
    m
}
