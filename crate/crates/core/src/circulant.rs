//! Hermitian circulant matrices and DFT-domain filters.
//!
//! A circulant `C` with first row `c` satisfies `C[m, n] = c[(n - m) mod N]`
//! and factors as `C = F diag(r) Fᴴ`, where `F[n, k] = exp(-j2πnk/N)/√N` is
//! the unitary DFT matrix and `r = DFT(c)`. All filters in this crate are
//! right-multiplications `Y · F diag(g) Fᴴ`, i.e. a forward FFT of each row,
//! a per-bin gain and an inverse FFT.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{dft_any, idft_any, Radix2Fft};
use crate::linalg::{check_square, hermitian_deviation, CMatrix};

/// Relative tolerance below which residual imaginary parts of a Hermitian
/// spectrum are treated as rounding noise.
pub const SPECTRUM_REAL_TOL: f64 = 1e-10;

/// Hermitian tolerance accepted by [`circulant_project`].
pub const PROJECT_HERMITIAN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianCirculant {
    first_row: Vec<Complex64>,
}

impl HermitianCirculant {
    /// Wraps a first row, checking `c[k] = conj(c[N-k])` to 1e-10 relative.
    pub fn from_first_row(first_row: Vec<Complex64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::Dimension("circulant first row is empty".into()));
        }
        let n = first_row.len();
        let scale = first_row.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if scale > 0.0 {
            let dev = (0..n)
                .map(|k| (first_row[k] - first_row[(n - k) % n].conj()).norm())
                .fold(0.0f64, f64::max)
                / scale;
            if dev > SPECTRUM_REAL_TOL {
                return Err(Error::NotHermitian(dev));
            }
        }
        Ok(Self { first_row })
    }

    /// Extracts the first row of a dense matrix after checking that it is
    /// circulant and Hermitian within `tol` (relative to its largest entry).
    pub fn from_dense(m: &CMatrix, tol: f64) -> Result<Self> {
        let n = check_square(m, "circulant matrix")?;
        let scale = crate::linalg::max_abs(m);
        let first_row: Vec<Complex64> = (0..n).map(|j| m[(0, j)]).collect();
        if scale > 0.0 {
            let mut dev = 0.0f64;
            for r in 0..n {
                for c in 0..n {
                    dev = dev.max((m[(r, c)] - first_row[(c + n - r) % n]).norm());
                }
            }
            let dev = dev / scale;
            if dev > tol {
                return Err(Error::NotCirculant(dev));
            }
        }
        Self::from_first_row(first_row)
    }

    pub fn identity(n: usize) -> Self {
        let mut first_row = vec![Complex64::new(0.0, 0.0); n.max(1)];
        first_row[0] = Complex64::new(1.0, 0.0);
        Self { first_row }
    }

    pub fn size(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[Complex64] {
        &self.first_row
    }

    /// Entry `(m, n)`, 0-based.
    pub fn entry(&self, m: usize, n: usize) -> Complex64 {
        let size = self.size();
        self.first_row[(n % size + size - m % size) % size]
    }

    pub fn expand(&self) -> CMatrix {
        let n = self.size();
        CMatrix::from_fn(n, n, |r, c| self.entry(r, c))
    }

    pub fn trace(&self) -> f64 {
        self.first_row[0].re * self.size() as f64
    }
}

/// Per-bin values of a DFT-diagonal operator `F diag(s) Fᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFilter {
    values: Vec<Complex64>,
}

impl SpectralFilter {
    pub fn from_real(values: Vec<f64>) -> Self {
        Self {
            values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn from_complex(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::from_real(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Applies `f` to the real part of every bin.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_real(self.values.iter().map(|z| f(z.re)).collect())
    }
}

fn truncate_to_real(values: Vec<Complex64>, tol: f64) -> Result<Vec<Complex64>> {
    let scale = values.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return Ok(values);
    }
    let worst = values.iter().fold(0.0f64, |a, z| a.max(z.im.abs())) / scale;
    if worst > tol {
        return Err(Error::NotHermitian(worst));
    }
    Ok(values.into_iter().map(|z| Complex64::new(z.re, 0.0)).collect())
}

/// Eigenvalues of a Hermitian circulant: the DFT of its first row, in
/// 0-based bin order. The matching eigenvectors are the columns of `F`.
pub fn eigenvalues_via_dft(c: &HermitianCirculant) -> Result<SpectralFilter> {
    let spectrum = dft_any(c.first_row());
    Ok(SpectralFilter::from_complex(truncate_to_real(spectrum, SPECTRUM_REAL_TOL)?))
}

/// Dense `F diag(s) Fᴴ`. This is circulant with first row `IDFT(s)/N`.
pub fn reconstruct_dense(s: &SpectralFilter) -> CMatrix {
    let n = s.len();
    let row: Vec<Complex64> = idft_any(s.values()).into_iter().map(|z| z / n as f64).collect();
    CMatrix::from_fn(n, n, |r, c| row[(c + n - r) % n])
}

/// First row of the nearest circulant matrix in Frobenius norm: entry `l` is
/// the mean of the `l`-th wrapped superdiagonal.
pub fn averaged_first_row(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    (0..n)
        .map(|lag| {
            let sum: Complex64 = (0..n).map(|r| m[(r, (r + lag) % n)]).sum();
            sum / n as f64
        })
        .collect()
}

/// Diagonal of `Fᴴ m F`, computed in O(N²) as the DFT of the diagonal-averaged
/// first row. Equals [`eigenvalues_via_dft`] when `m` is circulant.
pub fn circulant_project(m: &CMatrix) -> Result<SpectralFilter> {
    check_square(m, "projected matrix")?;
    let dev = hermitian_deviation(m);
    if dev > PROJECT_HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let spectrum = dft_any(&averaged_first_row(m));
    Ok(SpectralFilter::from_complex(truncate_to_real(spectrum, PROJECT_HERMITIAN_TOL)?))
}

/// `y · F diag(s) Fᴴ`, row by row with a forward FFT, per-bin scaling and an
/// inverse FFT. No dense product is formed.
pub fn apply_spectral_filter(y: &CMatrix, s: &SpectralFilter) -> Result<CMatrix> {
    let mut out = y.clone();
    apply_spectral_filter_in_place(&mut out, s)?;
    Ok(out)
}

/// [`apply_spectral_filter`] overwriting `y`, without allocating a result.
pub fn apply_spectral_filter_in_place(y: &mut CMatrix, s: &SpectralFilter) -> Result<()> {
    let plan = Radix2Fft::new(s.len())?;
    apply_with_plan(&plan, y, s.values())
}

pub(crate) fn apply_with_plan(plan: &Radix2Fft, y: &mut CMatrix, gains: &[Complex64]) -> Result<()> {
    let n = plan.len();
    if y.ncols() != n || gains.len() != n {
        return Err(Error::Dimension(format!(
            "filter of size {} applied to a matrix with {} columns",
            gains.len(),
            y.ncols()
        )));
    }
    let rows = y.nrows();
    let scale = 1.0 / n as f64;
    let scaled: Vec<Complex64> = gains.iter().map(|g| g * scale).collect();
    // Rows are strided in column-major storage. A tile of consecutive rows
    // is copied into a row-major scratch buffer, reading one short
    // contiguous run per column, so each transform then runs on a
    // contiguous, cache-resident row.
    const TILE: usize = 16;
    let data = y.as_mut_slice();
    let mut tile = vec![Complex64::new(0.0, 0.0); TILE * n];
    for r0 in (0..rows).step_by(TILE) {
        let height = TILE.min(rows - r0);
        for c in 0..n {
            for (b, v) in data[c * rows + r0..c * rows + r0 + height].iter().enumerate() {
                tile[b * n + c] = *v;
            }
        }
        for row in tile.chunks_exact_mut(n).take(height) {
            plan.forward(row);
            for (v, g) in row.iter_mut().zip(&scaled) {
                *v *= g;
            }
            plan.inverse(row);
        }
        for c in 0..n {
            for (b, v) in data[c * rows + r0..c * rows + r0 + height].iter_mut().enumerate() {
                *v = tile[b * n + c];
            }
        }
    }
    Ok(())
}
