//! Dense complex matrix helpers shared by the estimators and the tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, column-major.
pub type CMatrix = DMatrix<Complex64>;

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |m - mᴴ| / max |m|`, zero for the zero matrix.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// `‖a - b‖_F / ‖b‖_F`, or the absolute error when `b` is zero.
pub fn relative_frobenius(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = (a - b).norm();
    let reference = b.norm();
    if reference == 0.0 {
        diff
    } else {
        diff / reference
    }
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn check_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn is_power_of_two(n: usize) -> bool {
    n >= 1 && n.is_power_of_two()
}

/// Unitary DFT matrix with `F[n, k] = exp(-j2πnk/N) / √N`.
pub fn dft_matrix(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |r, c| {
        let phase = -2.0 * std::f64::consts::PI * ((r * c) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    })
}
