//! Channel estimators operating on pilot-correlated observations `Ỹ = H + Ñ`.
//!
//! Each row of `H` is treated as a zero-mean vector with covariance `R_H`
//! (`E[hᴴh] = R_H` for a row `h`), and `Ñ` has i.i.d. entries of variance
//! `σ²`. The LMMSE estimate is then `Ĥ = Ỹ A` with `A = (R_H + σ²I)⁻¹ R_H`.
//!
//! | method | covariance | filter |
//! |---|---|---|
//! | `ls` | none | identity |
//! | `lmmse-direct-known` | `R_H` | dense Cholesky solve |
//! | `lmmse-swp-known` | `R_H` circulant | per-bin `r/(r+σ²)` |
//! | `lmmse-swp-unknown` | estimated spectrum | per-bin `(λ*-σ²)/λ*` |
//! | `lmmse-direct-unknown` | sample covariance | dense Cholesky solve |

use std::fmt;
use std::str::FromStr;

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::circulant::{apply_spectral_filter, eigenvalues_via_dft, HermitianCirculant, SpectralFilter};
use crate::error::{Error, Result};
use crate::fft::Radix2Fft;
use crate::linalg::{check_square, CMatrix};

/// Condition-number estimate above which a sample covariance is rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ls,
    LmmseDirectKnown,
    LmmseSwpKnown,
    LmmseSwpUnknown,
    LmmseDirectUnknown,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ls,
        Method::LmmseDirectKnown,
        Method::LmmseSwpKnown,
        Method::LmmseSwpUnknown,
        Method::LmmseDirectUnknown,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::Ls => "ls",
            Method::LmmseDirectKnown => "lmmse-direct-known",
            Method::LmmseSwpKnown => "lmmse-swp-known",
            Method::LmmseSwpUnknown => "lmmse-swp-unknown",
            Method::LmmseDirectUnknown => "lmmse-direct-unknown",
        }
    }

    /// Whether the method relies on the FFT path (power-of-two N).
    pub fn is_spectral(self) -> bool {
        matches!(self, Method::LmmseSwpKnown | Method::LmmseSwpUnknown)
    }

    pub fn needs_known_covariance(self) -> bool {
        matches!(self, Method::LmmseDirectKnown | Method::LmmseSwpKnown)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidConfig(format!("noise variance must be positive, got {sigma2}")));
        }
        Ok(Self { sigma2 })
    }
}

/// The `T` observations of one coherence interval plus the noise level.
#[derive(Debug, Clone)]
pub struct ObservationBatch {
    observations: Vec<CMatrix>,
    noise: NoiseModel,
}

impl ObservationBatch {
    pub fn new(observations: Vec<CMatrix>, noise: NoiseModel) -> Result<Self> {
        let first = observations
            .first()
            .ok_or_else(|| Error::InsufficientObservations("batch is empty".into()))?;
        let n = check_square(first, "observation")?;
        if observations.iter().any(|o| o.nrows() != n || o.ncols() != n) {
            return Err(Error::Dimension("observations in a batch must share one size".into()));
        }
        Ok(Self { observations, noise })
    }

    pub fn observations(&self) -> &[CMatrix] {
        &self.observations
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn slots(&self) -> usize {
        self.observations.len()
    }

    pub fn size(&self) -> usize {
        self.observations[0].ncols()
    }
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub estimate: CMatrix,
    pub method: Method,
    pub filter_spectrum: Option<SpectralFilter>,
}

pub fn ls_estimate(y: &CMatrix) -> EstimateResult {
    EstimateResult {
        estimate: y.clone(),
        method: Method::Ls,
        filter_spectrum: None,
    }
}

/// Solves `a X = b` for Hermitian positive-definite `a`; also returns a cheap
/// condition estimate `(max Lᵢᵢ / min Lᵢᵢ)²` from the Cholesky factor.
fn hpd_solve(a: &CMatrix, b: &CMatrix) -> Option<(CMatrix, f64)> {
    let chol = Cholesky::new(a.clone())?;
    let diag = chol.l_dirty().diagonal();
    // The complex square root never fails, so an indefinite input shows up
    // as a non-real or non-positive pivot instead of a factorization error.
    if diag.iter().any(|z| !(z.re > 0.0) || z.im.abs() > 1e-12 * z.re) {
        return None;
    }
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
    let cond = if lo > 0.0 { (hi / lo).powi(2) } else { f64::INFINITY };
    Some((chol.solve(b), cond))
}

fn check_filter_input(y: &CMatrix, n: usize) -> Result<()> {
    if y.ncols() != n {
        return Err(Error::Dimension(format!(
            "observation has {} columns, covariance is {n}x{n}",
            y.ncols()
        )));
    }
    Ok(())
}

/// Dense LMMSE operator `A = (R_H + σ²I)⁻¹ R_H`.
pub fn direct_known_operator(ccm: &CMatrix, noise: NoiseModel) -> Result<CMatrix> {
    let n = check_square(ccm, "covariance")?;
    let mut regularized = ccm.clone();
    for i in 0..n {
        regularized[(i, i)] += noise.sigma2;
    }
    hpd_solve(&regularized, ccm)
        .map(|(a, _)| a)
        .ok_or_else(|| Error::InvalidCovariance("R_H + σ²I is not positive definite".into()))
}

pub fn lmmse_direct_known(y: &CMatrix, ccm: &CMatrix, noise: NoiseModel) -> Result<EstimateResult> {
    let a = direct_known_operator(ccm, noise)?;
    check_filter_input(y, a.nrows())?;
    Ok(EstimateResult {
        estimate: y * a,
        method: Method::LmmseDirectKnown,
        filter_spectrum: None,
    })
}

/// Per-bin gains `r_k / (r_k + σ²)` with `r_k` clamped at zero.
pub fn known_swp_filter(spectrum: &SpectralFilter, noise: NoiseModel) -> SpectralFilter {
    spectrum.map_real(|r| {
        let r = r.max(0.0);
        r / (r + noise.sigma2)
    })
}

pub fn lmmse_swp_known(y: &CMatrix, ccm: &HermitianCirculant, noise: NoiseModel) -> Result<EstimateResult> {
    let gains = known_swp_filter(&eigenvalues_via_dft(ccm)?, noise);
    let estimate = apply_spectral_filter(y, &gains)?;
    Ok(EstimateResult {
        estimate,
        method: Method::LmmseSwpKnown,
        filter_spectrum: Some(gains),
    })
}

/// Row sample covariance `(1/(T·N)) Σ_t Ỹ_tᴴ Ỹ_t`, an unbiased estimate of
/// `R_H + σ²I` when each row of `Ỹ_t` has that covariance.
pub fn sample_covariance(batch: &ObservationBatch) -> CMatrix {
    let n = batch.size();
    let mut acc = CMatrix::zeros(n, n);
    for y in batch.observations() {
        acc.gemm_ad(Complex64::new(1.0, 0.0), y, y, Complex64::new(1.0, 0.0));
    }
    acc / Complex64::new((batch.slots() * y_rows(batch)) as f64, 0.0)
}

fn y_rows(batch: &ObservationBatch) -> usize {
    batch.observations()[0].nrows()
}

/// ML estimate of the observation-covariance eigenvalues under the circulant
/// constraint: the diagonal of `Fᴴ R̂ F`, clamped at zero.
///
/// Computed as an averaged periodogram of the observation rows, which equals
/// `circulant_project(sample_covariance(batch))` without forming the N×N
/// sample covariance.
pub fn ml_spectral_eigs(batch: &ObservationBatch) -> Result<SpectralFilter> {
    let n = batch.size();
    let plan = Radix2Fft::new(n)?;
    let mut power = vec![0.0f64; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for y in batch.observations() {
        let rows = y.nrows();
        let src = y.as_slice();
        for r in 0..rows {
            for (c, b) in buf.iter_mut().enumerate() {
                *b = src[c * rows + r];
            }
            plan.forward(&mut buf);
            for (p, b) in power.iter_mut().zip(&buf) {
                *p += b.norm_sqr();
            }
        }
    }
    let scale = 1.0 / (batch.slots() * y_rows(batch) * n) as f64;
    Ok(SpectralFilter::from_real(power.into_iter().map(|p| (p * scale).max(0.0)).collect()))
}

/// Per-bin gains `(λ*_k - σ²) / λ*_k` clamped to `[0, 1]`; empty bins get 0.
pub fn unknown_swp_filter(observation_spectrum: &SpectralFilter, noise: NoiseModel) -> SpectralFilter {
    observation_spectrum.map_real(|lambda| {
        if lambda <= 0.0 {
            0.0
        } else {
            ((lambda - noise.sigma2) / lambda).clamp(0.0, 1.0)
        }
    })
}

pub fn lmmse_swp_unknown(y: &CMatrix, batch: &ObservationBatch) -> Result<EstimateResult> {
    let gains = unknown_swp_filter(&ml_spectral_eigs(batch)?, batch.noise());
    let estimate = apply_spectral_filter(y, &gains)?;
    Ok(EstimateResult {
        estimate,
        method: Method::LmmseSwpUnknown,
        filter_spectrum: Some(gains),
    })
}

/// Dense operator `R̂⁻¹ (R̂ - σ²I)` from the sample covariance `R̂`.
pub fn direct_unknown_operator(batch: &ObservationBatch) -> Result<CMatrix> {
    let sample = sample_covariance(batch);
    let n = sample.nrows();
    let (inv_times_sample, cond) = hpd_solve(&sample, &sample)
        .ok_or_else(|| Error::InsufficientObservations("sample covariance is singular".into()))?;
    if !(cond <= MAX_CONDITION) {
        return Err(Error::InsufficientObservations(format!(
            "sample covariance condition estimate {cond:e} exceeds {MAX_CONDITION:e}"
        )));
    }
    // R̂⁻¹(R̂ - σ²I) = I - σ² R̂⁻¹, obtained from the solve against R̂ itself
    // so that the subtraction happens after factorization.
    let inverse = hpd_solve(&sample, &CMatrix::identity(n, n))
        .map(|(x, _)| x)
        .ok_or_else(|| Error::InsufficientObservations("sample covariance is singular".into()))?;
    Ok(inv_times_sample - inverse * Complex64::new(batch.noise().sigma2, 0.0))
}

pub fn lmmse_direct_unknown(y: &CMatrix, batch: &ObservationBatch) -> Result<EstimateResult> {
    let a = direct_unknown_operator(batch)?;
    check_filter_input(y, a.nrows())?;
    Ok(EstimateResult {
        estimate: y * a,
        method: Method::LmmseDirectUnknown,
        filter_spectrum: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulant::circulant_project;
    use crate::geometry::{build_ccm, UcaConfig};
    use crate::linalg::{dft_matrix, relative_frobenius};
    use crate::rng::{complex_normal, white_matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let a = random_matrix(rng, n, n);
        a.adjoint() * &a + CMatrix::identity(n, n) * c(0.5)
    }

    /// Rows drawn with covariance `F diag(spectrum) Fᴴ`.
    fn colored_rows(rng: &mut ChaCha8Rng, rows: usize, spectrum: &[f64]) -> CMatrix {
        let n = spectrum.len();
        let f = dft_matrix(n);
        let white = white_matrix(rng, rows, n);
        let shape = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, spectrum.iter().map(|v| c(v.sqrt()))));
        white * shape * f.adjoint()
    }

    fn ccm_and_noise(n: usize, snr_db: f64) -> (HermitianCirculant, NoiseModel) {
        let ccm = build_ccm(&UcaConfig::reference(n)).unwrap();
        let sigma2 = ccm.trace() / n as f64 * 10f64.powf(-snr_db / 10.0);
        (ccm, NoiseModel::new(sigma2).unwrap())
    }

    #[test]
    fn method_ids_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.id().parse::<Method>().unwrap(), m);
        }
        assert_eq!("mmse".parse::<Method>().unwrap_err(), Error::UnknownMethod("mmse".into()));
    }

    #[test]
    fn noise_model_rejects_nonpositive() {
        assert!(NoiseModel::new(0.0).is_err());
        assert!(NoiseModel::new(-1.0).is_err());
        assert!(NoiseModel::new(f64::INFINITY).is_err());
    }

    #[test]
    fn batch_validation() {
        let noise = NoiseModel::new(1.0).unwrap();
        assert!(ObservationBatch::new(vec![], noise).is_err());
        assert!(ObservationBatch::new(vec![CMatrix::zeros(4, 4), CMatrix::zeros(8, 8)], noise).is_err());
        assert!(ObservationBatch::new(vec![CMatrix::zeros(4, 3)], noise).is_err());
    }

    #[test]
    fn ls_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = random_matrix(&mut rng, 4, 4);
        assert_eq!(ls_estimate(&y).estimate, y);
        assert_eq!(ls_estimate(&CMatrix::zeros(3, 3)).estimate, CMatrix::zeros(3, 3));
    }

    #[test]
    fn direct_known_noiseless_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_pd(&mut rng, 8);
        let trace: f64 = (0..8).map(|i| r[(i, i)].re).sum();
        let noise = NoiseModel::new(1e-30 * trace / 8.0).unwrap();
        let y = random_matrix(&mut rng, 8, 8);
        let est = lmmse_direct_known(&y, &r, noise).unwrap().estimate;
        assert!(relative_frobenius(&est, &y) < 1e-8);
    }

    #[test]
    fn direct_known_zero_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = random_matrix(&mut rng, 8, 8);
        let est = lmmse_direct_known(&y, &CMatrix::zeros(8, 8), NoiseModel::new(0.1).unwrap()).unwrap();
        assert_eq!(est.estimate.norm(), 0.0);
    }

    #[test]
    fn direct_known_rejects_indefinite() {
        let mut r = CMatrix::identity(4, 4);
        r[(2, 2)] = c(-5.0);
        let err = lmmse_direct_known(&CMatrix::zeros(4, 4), &r, NoiseModel::new(0.1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidCovariance(_)));
    }

    #[test]
    fn direct_known_matches_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (ccm, noise) = ccm_and_noise(32, 10.0);
        let r = ccm.expand();
        let y = random_matrix(&mut rng, 32, 32);
        let inverse = (&r + CMatrix::identity(32, 32) * c(noise.sigma2)).try_inverse().unwrap();
        let want = &y * inverse * &r;
        let got = lmmse_direct_known(&y, &r, noise).unwrap().estimate;
        assert!(relative_frobenius(&got, &want) < 1e-10);
    }

    #[test]
    fn swp_known_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (ccm, _) = ccm_and_noise(16, 0.0);
        let y = random_matrix(&mut rng, 16, 16);
        let max_r = eigenvalues_via_dft(&ccm).unwrap().max_abs();
        let loud = NoiseModel::new(1e12 * max_r).unwrap();
        let est = lmmse_swp_known(&y, &ccm, loud).unwrap().estimate;
        assert!(est.norm() <= 1e-10 * y.norm());

        // all eigenvalues equal σ² ⇒ gain 1/2 everywhere
        let flat = HermitianCirculant::from_first_row({
            let mut row = vec![c(0.0); 16];
            row[0] = c(0.3);
            row
        })
        .unwrap();
        let est = lmmse_swp_known(&y, &flat, NoiseModel::new(0.3).unwrap()).unwrap();
        assert!(relative_frobenius(&est.estimate, &(&y * c(0.5))) < 1e-15);
        assert!(est.filter_spectrum.unwrap().values().iter().all(|g| *g == c(0.5)));
    }

    #[test]
    fn swp_known_equals_direct_known() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for &n in &[8usize, 64, 256] {
            let (ccm, noise) = ccm_and_noise(n, 10.0);
            let y = random_matrix(&mut rng, n, n);
            let fast = lmmse_swp_known(&y, &ccm, noise).unwrap().estimate;
            let dense = lmmse_direct_known(&y, &ccm.expand(), noise).unwrap().estimate;
            assert!(relative_frobenius(&fast, &dense) <= 1e-10, "n={n}");
        }
    }

    #[test]
    fn swp_known_rejects_non_power_of_two() {
        let ccm = build_ccm(&UcaConfig::reference(6)).unwrap();
        let err = lmmse_swp_known(&CMatrix::zeros(6, 6), &ccm, NoiseModel::new(1.0).unwrap()).unwrap_err();
        assert_eq!(err, Error::NotPowerOfTwo(6));
    }

    #[test]
    fn known_filter_is_monotone() {
        let spectrum = SpectralFilter::from_real((0..50).map(|i| i as f64 * 0.2).collect());
        for &s in &[0.01, 0.1, 1.0, 10.0] {
            let lo = known_swp_filter(&spectrum, NoiseModel::new(s).unwrap()).real_parts();
            let hi = known_swp_filter(&spectrum, NoiseModel::new(s * 2.0).unwrap()).real_parts();
            assert!(lo.windows(2).all(|w| w[0] <= w[1]));
            assert!(lo.iter().zip(&hi).all(|(a, b)| a >= b));
            assert!(lo.iter().all(|g| (0.0..=1.0).contains(g)));
        }
    }

    #[test]
    fn sample_covariance_cases() {
        let noise = NoiseModel::new(1.0).unwrap();
        let n = 4;
        let scaled_identity = CMatrix::identity(n, n) * c((n as f64).sqrt());
        let batch = ObservationBatch::new(vec![scaled_identity], noise).unwrap();
        assert!(relative_frobenius(&sample_covariance(&batch), &CMatrix::identity(n, n)) < 1e-15);

        let batch = ObservationBatch::new(vec![CMatrix::zeros(n, n); 3], noise).unwrap();
        assert_eq!(sample_covariance(&batch).norm(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, n, n);
        let batch = ObservationBatch::new(vec![a.clone(), -a.clone()], noise).unwrap();
        let want = a.adjoint() * &a / c(n as f64);
        assert!(relative_frobenius(&sample_covariance(&batch), &want) < 1e-14);
    }

    #[test]
    fn periodogram_matches_projected_sample_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let obs = (0..5).map(|_| random_matrix(&mut rng, 16, 16)).collect();
        let batch = ObservationBatch::new(obs, NoiseModel::new(0.2).unwrap()).unwrap();
        let fast = ml_spectral_eigs(&batch).unwrap();
        let dense = circulant_project(&sample_covariance(&batch)).unwrap();
        for (a, b) in fast.values().iter().zip(dense.values()) {
            assert!((a - b).norm() <= 1e-12 * dense.max_abs());
        }
    }

    #[test]
    fn ml_eigs_trivial_batches() {
        let noise = NoiseModel::new(0.7).unwrap();
        let zeros = ObservationBatch::new(vec![CMatrix::zeros(8, 8); 2], noise).unwrap();
        assert!(ml_spectral_eigs(&zeros).unwrap().values().iter().all(|z| z.norm() == 0.0));

        // Ỹ = √(Nσ²)·I has sample covariance exactly σ²I
        let y = CMatrix::identity(8, 8) * c((8.0f64 * 0.7).sqrt());
        let batch = ObservationBatch::new(vec![y], noise).unwrap();
        let eigs = ml_spectral_eigs(&batch).unwrap();
        assert!(eigs.values().iter().all(|z| (z.re - 0.7).abs() < 1e-14));
    }

    #[test]
    fn ml_eigs_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spectrum = [4.0, 0.5, 1.0, 2.0, 0.25, 3.0, 1.5, 0.75];
        let obs = (0..10_000).map(|_| colored_rows(&mut rng, 8, &spectrum)).collect();
        let batch = ObservationBatch::new(obs, NoiseModel::new(1.0).unwrap()).unwrap();
        let est = ml_spectral_eigs(&batch).unwrap().real_parts();
        let mard: f64 = est.iter().zip(&spectrum).map(|(e, s)| (e - s).abs() / s).sum::<f64>() / 8.0;
        assert!(mard <= 0.05, "mean abs relative deviation {mard}");
    }

    #[test]
    fn swp_unknown_pure_noise_shrinks_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let sigma2: f64 = 0.4;
        let obs: Vec<CMatrix> = (0..10_000).map(|_| white_matrix(&mut rng, 8, 8) * c(sigma2.sqrt())).collect();
        let y = obs[0].clone();
        let batch = ObservationBatch::new(obs, NoiseModel::new(sigma2).unwrap()).unwrap();
        let est = lmmse_swp_unknown(&y, &batch).unwrap().estimate;
        assert!(est.norm() <= 0.1 * y.norm());
    }

    #[test]
    fn swp_unknown_high_snr_passthrough() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let obs: Vec<CMatrix> = (0..20).map(|_| random_matrix(&mut rng, 16, 16) * c(100.0)).collect();
        let y = obs[3].clone();
        let batch = ObservationBatch::new(obs, NoiseModel::new(1e-3).unwrap()).unwrap();
        let est = lmmse_swp_unknown(&y, &batch).unwrap().estimate;
        assert!(relative_frobenius(&est, &y) < 0.01);
    }

    #[test]
    fn swp_unknown_equals_direct_on_circulant_sample_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 16;
        // Circulant observations give a circulant sample covariance.
        let obs: Vec<CMatrix> = (0..4)
            .map(|_| {
                let row: Vec<Complex64> = (0..n).map(|_| complex_normal(&mut rng) * 3.0).collect();
                CMatrix::from_fn(n, n, |r, col| row[(col + n - r) % n])
            })
            .collect();
        let batch = ObservationBatch::new(obs.clone(), NoiseModel::new(0.05).unwrap()).unwrap();
        let eigs = ml_spectral_eigs(&batch).unwrap();
        assert!(eigs.real_parts().iter().all(|&l| l > 0.05), "clamp must not bind here");
        let y = random_matrix(&mut rng, n, n);
        let fast = lmmse_swp_unknown(&y, &batch).unwrap().estimate;
        let dense = lmmse_direct_unknown(&y, &batch).unwrap().estimate;
        assert!(relative_frobenius(&fast, &dense) <= 1e-9);
    }

    #[test]
    fn direct_unknown_scaled_identity_cases() {
        let n = 8;
        let sigma2 = 0.3;
        let noise = NoiseModel::new(sigma2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let y = random_matrix(&mut rng, n, n);

        let at = |scale: f64| {
            let obs = CMatrix::identity(n, n) * c((n as f64 * scale * sigma2).sqrt());
            ObservationBatch::new(vec![obs], noise).unwrap()
        };
        let zero = lmmse_direct_unknown(&y, &at(1.0)).unwrap().estimate;
        assert!(zero.norm() < 1e-14 * y.norm());
        let half = lmmse_direct_unknown(&y, &at(2.0)).unwrap().estimate;
        assert!(relative_frobenius(&half, &(&y * c(0.5))) < 1e-14);
    }

    #[test]
    fn direct_unknown_matches_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let n = 16;
        let obs: Vec<CMatrix> = (0..40).map(|_| random_matrix(&mut rng, n, n)).collect();
        let noise = NoiseModel::new(0.1).unwrap();
        let batch = ObservationBatch::new(obs, noise).unwrap();
        let y = batch.observations()[5].clone();

        let mut sample = CMatrix::zeros(n, n);
        for o in batch.observations() {
            sample += o.adjoint() * o;
        }
        sample /= c((40 * n) as f64);
        let ml_h = &sample - CMatrix::identity(n, n) * c(0.1);
        let want = &y * sample.clone().try_inverse().unwrap() * ml_h;
        let got = lmmse_direct_unknown(&y, &batch).unwrap().estimate;
        assert!(relative_frobenius(&got, &want) <= 1e-10);
    }

    #[test]
    fn direct_unknown_rejects_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let n = 8;
        // one observation with a single nonzero row has rank one
        let mut y = CMatrix::zeros(n, n);
        for col in 0..n {
            y[(0, col)] = complex_normal(&mut rng);
        }
        let batch = ObservationBatch::new(vec![y.clone()], NoiseModel::new(0.1).unwrap()).unwrap();
        let err = lmmse_direct_unknown(&y, &batch).unwrap_err();
        assert!(matches!(err, Error::InsufficientObservations(_)));
    }

    #[test]
    fn unknown_filter_converges_to_known_filter() {
        let n = 8;
        let r = [3.0, 1.0, 0.2, 0.05, 0.0, 0.4, 1.5, 2.5];
        let sigma2 = 0.5;
        let noise = NoiseModel::new(sigma2).unwrap();
        let known = known_swp_filter(&SpectralFilter::from_real(r.to_vec()), noise).real_parts();
        let observed: Vec<f64> = r.iter().map(|v| v + sigma2).collect();
        let mut total = 0.0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let obs = (0..10_000).map(|_| colored_rows(&mut rng, n, &observed)).collect();
            let batch = ObservationBatch::new(obs, noise).unwrap();
            let est = unknown_swp_filter(&ml_spectral_eigs(&batch).unwrap(), noise).real_parts();
            total += est.iter().zip(&known).map(|(a, b)| (a - b).abs()).sum::<f64>() / n as f64;
        }
        assert!(total / 20.0 <= 0.02, "mean abs deviation {}", total / 20.0);
    }

    #[test]
    fn swp_estimates_never_grow() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let (ccm, noise) = ccm_and_noise(32, 0.0);
        let obs: Vec<CMatrix> = (0..3).map(|_| random_matrix(&mut rng, 32, 32)).collect();
        let batch = ObservationBatch::new(obs.clone(), noise).unwrap();
        for y in &obs {
            assert!(lmmse_swp_known(y, &ccm, noise).unwrap().estimate.norm() <= y.norm());
            assert!(lmmse_swp_unknown(y, &batch).unwrap().estimate.norm() <= y.norm());
        }
    }
}
