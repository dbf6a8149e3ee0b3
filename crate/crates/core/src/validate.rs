//! Self-check suite for one scene.
//!
//! Each check recomputes a quantity along two independent routes and compares
//! them against a fixed tolerance. The CLI `validate` subcommand prints the
//! report and exits non-zero if any check fails.

use std::fmt;

use num_complex::Complex64;

use crate::circulant::{apply_spectral_filter, circulant_project, eigenvalues_via_dft};
use crate::estimators::{known_swp_filter, lmmse_direct_known, NoiseModel};
use crate::fft::dft_any;
use crate::geometry::{build_ccm, build_channel, ccm_dense, UcaConfig};
use crate::linalg::{dft_matrix, relative_frobenius};
use crate::rng::{white_matrix, StreamKey, StreamRole};
use crate::sim::{sigma2_for_snr, PSD_TOL};
use crate::error::Result;

/// Relative tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-10;

/// Dense O(N³) cross-checks are skipped above this size.
pub const DENSE_CHECK_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} value={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, value: f64, tolerance: f64) {
        self.checks.push(Check {
            name,
            passed: value.is_finite() && value <= tolerance,
            value,
            tolerance,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Runs every check that applies to `cfg`. Errors are returned only for an
/// invalid scene; numerical disagreements show up as failed checks.
pub fn run_checks(cfg: &UcaConfig, seed: u64) -> Result<ValidationReport> {
    cfg.validate()?;
    let n = cfg.n_antennas;
    let mut report = ValidationReport::default();

    report.push(
        "taylor-bound",
        cfg.approximation_error() / cfg.approximation_bound(),
        1.0 + EXACT_TOL,
    );

    let ccm = build_ccm(cfg)?;
    let h = build_channel(cfg)?.into_inner();
    report.push(
        "channel-gram-equals-ccm",
        relative_frobenius(&(h.adjoint() * &h), &ccm.expand()),
        EXACT_TOL,
    );

    let raw = dft_any(ccm.first_row());
    let peak = raw.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let imag = raw.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    report.push("spectrum-real", imag / peak, EXACT_TOL);

    let spectrum = eigenvalues_via_dft(&ccm)?.real_parts();
    let max = spectrum.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
    report.push("spectrum-psd", (-min / max).max(0.0), PSD_TOL);

    if n <= DENSE_CHECK_LIMIT {
        let dense = ccm_dense(cfg);
        report.push("ccm-circulant", relative_frobenius(&ccm.expand(), &dense), EXACT_TOL);

        let f = dft_matrix(n);
        let diag = f.adjoint() * &dense * &f;
        let off = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| diag[(r, c)].norm())
            .fold(0.0, f64::max);
        report.push("dft-diagonalizes-ccm", off / max, EXACT_TOL);

        let projected = circulant_project(&dense)?.real_parts();
        let err = projected
            .iter()
            .zip(&spectrum)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.push("projection-recovers-spectrum", err / max, EXACT_TOL);

        if cfg.validate_for_fft().is_ok() {
            let noise = NoiseModel::new(sigma2_for_snr(ccm.trace() / n as f64, 10.0))?;
            let mut rng = StreamKey::new(seed, 0, 0, StreamRole::Observation).rng();
            let y = h.clone() + white_matrix(&mut rng, n, n) * Complex64::new(noise.sigma2.sqrt(), 0.0);
            let swp = apply_spectral_filter(&y, &known_swp_filter(&eigenvalues_via_dft(&ccm)?, noise))?;
            let direct = lmmse_direct_known(&y, &dense, noise)?.estimate;
            report.push("swp-matches-direct", relative_frobenius(&swp, &direct), EXACT_TOL);
        }
    }
    Ok(report)
}
