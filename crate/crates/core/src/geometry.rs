//! Scene geometry and the spherical-wave line-of-sight channel between two
//! parallel, coaxial UCAs.
//!
//! Element `k` of either array sits at azimuth `2πk/N` (0-based) and the two
//! arrays share the same angular offset, so every quantity between receive
//! element `n` and transmit element `m` depends only on `(n - m) mod N`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::circulant::HermitianCirculant;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance for the circulant self-check in [`build_ccm`].
pub const CIRCULANT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcaConfig {
    pub n_antennas: usize,
    /// Transmit array radius, m.
    pub radius_tx: f64,
    /// Receive array radius, m.
    pub radius_rx: f64,
    /// Axial separation of the two array planes, m.
    pub link_distance: f64,
    /// Hz.
    pub carrier_freq: f64,
}

impl UcaConfig {
    pub fn new(n_antennas: usize, radius_tx: f64, radius_rx: f64, link_distance: f64, carrier_freq: f64) -> Result<Self> {
        let cfg = Self {
            n_antennas,
            radius_tx,
            radius_rx,
            link_distance,
            carrier_freq,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 100 GHz carrier, 0.5 m radii, 100 m separation.
    pub fn reference(n_antennas: usize) -> Self {
        Self {
            n_antennas,
            radius_tx: 0.5,
            radius_rx: 0.5,
            link_distance: 100.0,
            carrier_freq: 100e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_antennas < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 antennas, got {}", self.n_antennas)));
        }
        let positive = [
            ("radius_tx", self.radius_tx),
            ("radius_rx", self.radius_rx),
            ("link_distance", self.link_distance),
            ("carrier_freq", self.carrier_freq),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate), and additionally requires a
    /// power-of-two antenna count for the FFT-based estimators.
    pub fn validate_for_fft(&self) -> Result<()> {
        self.validate()?;
        if !self.n_antennas.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.n_antennas));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// `R_t² + R_r² - 2 R_t R_r cos(2π(n - m)/N)`.
    fn offset_sq(&self, n: usize, m: usize) -> f64 {
        let n_ant = self.n_antennas;
        let lag = (n % n_ant + n_ant - m % n_ant) % n_ant;
        // cos is even; folding the lag keeps (n, m) and (m, n) bit-identical
        let lag = lag.min(n_ant - lag);
        let angle = 2.0 * PI * lag as f64 / n_ant as f64;
        self.radius_tx.powi(2) + self.radius_rx.powi(2) - 2.0 * self.radius_tx * self.radius_rx * angle.cos()
    }

    /// Worst-case Fresnel approximation error over all element pairs, m.
    pub fn approximation_error(&self) -> f64 {
        (0..self.n_antennas)
            .map(|lag| (approx_distance(self, lag, 0) - exact_distance(self, lag, 0)).abs())
            .fold(0.0, f64::max)
    }

    /// Upper bound `(R_t + R_r)⁴ / (8 d³)` on [`approximation_error`](Self::approximation_error).
    pub fn approximation_bound(&self) -> f64 {
        (self.radius_tx + self.radius_rx).powi(4) / (8.0 * self.link_distance.powi(3))
    }
}

/// Fresnel (second-order) distance between receive element `n` and transmit
/// element `m`.
pub fn approx_distance(cfg: &UcaConfig, n: usize, m: usize) -> f64 {
    cfg.link_distance + cfg.offset_sq(n, m) / (2.0 * cfg.link_distance)
}

/// Exact Euclidean distance between receive element `n` and transmit element `m`.
pub fn exact_distance(cfg: &UcaConfig, n: usize, m: usize) -> f64 {
    (cfg.link_distance.powi(2) + cfg.offset_sq(n, m)).sqrt()
}

/// Amplitude `λd / (4πd² + 2π(R_t² + R_r² - 2R_tR_r cos(2π(n-m)/N)))`.
pub fn path_gain(cfg: &UcaConfig, n: usize, m: usize) -> f64 {
    let d = cfg.link_distance;
    cfg.wavelength() * d / (4.0 * PI * d * d + 2.0 * PI * cfg.offset_sq(n, m))
}

/// One `N × N` channel realization; row = receive antenna, column = transmit antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(pub CMatrix);

impl ChannelMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        crate::linalg::check_square(&entries, "channel matrix")?;
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidConfig("channel matrix has non-finite entries".into()));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }
}

fn channel_entry(cfg: &UcaConfig, n: usize, m: usize) -> Complex64 {
    let lambda = cfg.wavelength();
    let d = cfg.link_distance;
    let phase = PI * (2.0 * d * d + cfg.offset_sq(n, m)) / (lambda * d);
    Complex64::from_polar(path_gain(cfg, n, m), phase)
}

/// Deterministic spherical-wave channel. It is circulant.
pub fn build_channel(cfg: &UcaConfig) -> Result<ChannelMatrix> {
    cfg.validate()?;
    let n = cfg.n_antennas;
    // One evaluation per lag keeps the matrix exactly circulant.
    let lags: Vec<Complex64> = (0..n).map(|lag| channel_entry(cfg, lag, 0)).collect();
    Ok(ChannelMatrix(CMatrix::from_fn(n, n, |r, c| lags[(r + n - c) % n])))
}

/// Covariance entry `(m, n)`: `Σ_i α_{i,m} α_{i,n} exp(j2π(d_{i,n} - d_{i,m})/λ)`
/// with the distance difference from the Fresnel approximation,
/// `d_{i,n} - d_{i,m} = R_r R_t (cos(2π(i-m)/N) - cos(2π(i-n)/N)) / d`.
pub fn ccm_entry(cfg: &UcaConfig, m: usize, n: usize) -> Complex64 {
    let n_ant = cfg.n_antennas;
    let lambda = cfg.wavelength();
    let rr_rt_over_d = cfg.radius_rx * cfg.radius_tx / cfg.link_distance;
    let cos_lag = |a: usize, b: usize| {
        let lag = (a + n_ant - b) % n_ant;
        (2.0 * PI * lag as f64 / n_ant as f64).cos()
    };
    (0..n_ant)
        .map(|i| {
            let weight = path_gain(cfg, i, m) * path_gain(cfg, i, n);
            let delta = rr_rt_over_d * (cos_lag(i, m) - cos_lag(i, n));
            Complex64::from_polar(weight, 2.0 * PI * delta / lambda)
        })
        .sum()
}

/// Entrywise dense covariance matrix, O(N³).
pub fn ccm_dense(cfg: &UcaConfig) -> CMatrix {
    let n = cfg.n_antennas;
    CMatrix::from_fn(n, n, |r, c| ccm_entry(cfg, r, c))
}

/// Channel covariance matrix as a Hermitian circulant.
///
/// The first row is summed directly (O(N²)); the second row is computed the
/// same way and compared against the cyclic shift of the first as a guard
/// against indexing errors.
pub fn build_ccm(cfg: &UcaConfig) -> Result<HermitianCirculant> {
    cfg.validate()?;
    let n = cfg.n_antennas;
    let first_row: Vec<Complex64> = (0..n).map(|col| ccm_entry(cfg, 0, col)).collect();
    let scale = first_row.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let dev = (0..n)
        .map(|col| (ccm_entry(cfg, 1, (col + 1) % n) - first_row[col]).norm())
        .fold(0.0f64, f64::max)
        / scale;
    if dev > CIRCULANT_TOL {
        return Err(Error::NotCirculant(dev));
    }
    HermitianCirculant::from_first_row(first_row)
}
