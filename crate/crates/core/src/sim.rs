//! Monte-Carlo harness: pilots, channel draws, noise, NMSE sweeps.
//!
//! Channel model (`gaussian-prior`): every row of `H_t` is an independent
//! CN(0, R_H) vector, with `R_H` the spherical-wave covariance. Under this
//! model `E[‖H‖²_F] = N·tr(R_H)` and the known-covariance LMMSE filter is the
//! exact per-row MMSE estimator. `deterministic-los` reuses the fixed channel
//! of [`build_channel`] for every slot.
//!
//! SNR is the ratio of average per-entry channel power to per-entry noise
//! power, so LS always has NMSE `10^(-SNR/10)`.
//!
//! Random streams are keyed by `(seed, trial, slot, role)` and shared across
//! SNR points: the same channel and the same unit-power noise are reused and
//! only rescaled, which keeps the curves comparable point to point. Trial
//! results are reduced in trial order, so output does not depend on the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::circulant::{apply_with_plan, eigenvalues_via_dft, HermitianCirculant, SpectralFilter};
use crate::error::{Error, Result};
use crate::estimators::{
    direct_known_operator, direct_unknown_operator, known_swp_filter, ml_spectral_eigs, unknown_swp_filter,
    Method, NoiseModel, ObservationBatch,
};
use crate::fft::{idft_any, Radix2Fft};
use crate::geometry::{build_ccm, build_channel, ChannelMatrix, UcaConfig};
use crate::linalg::{frobenius_sq, CMatrix};
use crate::rng::{white_matrix, StreamKey, StreamRole};

/// Tolerance on negative covariance eigenvalues, relative to the largest.
pub const PSD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelMode {
    GaussianPrior,
    DeterministicLos,
}

impl ChannelMode {
    pub fn id(self) -> &'static str {
        match self {
            ChannelMode::GaussianPrior => "gaussian-prior",
            ChannelMode::DeterministicLos => "deterministic-los",
        }
    }
}

impl fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ChannelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-prior" => Ok(ChannelMode::GaussianPrior),
            "deterministic-los" => Ok(ChannelMode::DeterministicLos),
            other => Err(Error::InvalidConfig(format!("unknown channel mode `{other}`"))),
        }
    }
}

/// `L × N` pilot matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    entries: CMatrix,
}

impl PilotMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn pilot_length(&self) -> usize {
        self.entries.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.entries.ncols()
    }

    /// `max |ΓᴴΓ - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let gram = self.entries.adjoint() * &self.entries;
        let n = gram.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((gram[(r, c)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// First `n` columns of the `l × l` unitary DFT matrix.
pub fn make_pilots(n: usize, l: usize) -> Result<PilotMatrix> {
    if n == 0 {
        return Err(Error::InvalidConfig("pilot matrix needs at least one antenna".into()));
    }
    if l < n {
        return Err(Error::InvalidConfig(format!(
            "pilot length {l} is shorter than the antenna count {n}; columns cannot be orthogonal"
        )));
    }
    let scale = 1.0 / (l as f64).sqrt();
    let entries = CMatrix::from_fn(l, n, |r, c| {
        let phase = -2.0 * std::f64::consts::PI * ((r * c) % l) as f64 / l as f64;
        Complex64::from_polar(scale, phase)
    });
    Ok(PilotMatrix { entries })
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::InvalidConfig(format!("noise variance must be non-negative, got {sigma2}")));
    }
    Ok(())
}

fn received(h: &CMatrix, pilots: &PilotMatrix, scaled_noise: CMatrix) -> CMatrix {
    let mut y = scaled_noise;
    y.gemm(Complex64::new(1.0, 0.0), h, &pilots.entries.adjoint(), Complex64::new(1.0, 0.0));
    y
}

/// `Y = H Γᴴ + N` with i.i.d. CN(0, σ²) noise entries.
pub fn transmit_receive<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    pilots: &PilotMatrix,
    sigma2: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    check_sigma2(sigma2)?;
    if h.size() != pilots.antennas() {
        return Err(Error::Dimension(format!(
            "channel has {} transmit antennas, pilots have {}",
            h.size(),
            pilots.antennas()
        )));
    }
    let noise = white_matrix(rng, h.size(), pilots.pilot_length()) * Complex64::new(sigma2.sqrt(), 0.0);
    Ok(received(h.entries(), pilots, noise))
}

/// `Ỹ = Y Γ`.
pub fn correlate(y: &CMatrix, pilots: &PilotMatrix) -> Result<CMatrix> {
    if y.ncols() != pilots.pilot_length() {
        return Err(Error::Dimension(format!(
            "received block has {} columns, pilot length is {}",
            y.ncols(),
            pilots.pilot_length()
        )));
    }
    Ok(y * pilots.entries())
}

/// Draws channel realizations for one scene.
#[derive(Debug, Clone)]
pub enum ChannelSampler {
    /// Rows `w · diag(√r) · Fᴴ` with `w` white, so each row has covariance `F diag(r) Fᴴ`.
    GaussianPrior { sqrt_spectrum: Vec<f64> },
    DeterministicLos(CMatrix),
}

impl ChannelSampler {
    pub fn gaussian(ccm: &HermitianCirculant) -> Result<Self> {
        let spectrum = eigenvalues_via_dft(ccm)?.real_parts();
        let max = spectrum.iter().cloned().fold(0.0f64, f64::max);
        if let Some(bad) = spectrum.iter().find(|&&r| r < -PSD_TOL * max) {
            return Err(Error::InvalidCovariance(format!("negative eigenvalue {bad:e}")));
        }
        Ok(Self::GaussianPrior {
            sqrt_spectrum: spectrum.into_iter().map(|r| r.max(0.0).sqrt()).collect(),
        })
    }

    pub fn deterministic(cfg: &UcaConfig) -> Result<Self> {
        Ok(Self::DeterministicLos(build_channel(cfg)?.into_inner()))
    }

    pub fn for_mode(mode: ChannelMode, cfg: &UcaConfig, ccm: &HermitianCirculant) -> Result<Self> {
        match mode {
            ChannelMode::GaussianPrior => Self::gaussian(ccm),
            ChannelMode::DeterministicLos => Self::deterministic(cfg),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Self::GaussianPrior { sqrt_spectrum } => sqrt_spectrum.len(),
            Self::DeterministicLos(h) => h.nrows(),
        }
    }

    /// Expected `‖H‖²_F / N²`.
    pub fn mean_entry_power(&self) -> f64 {
        let n = self.size() as f64;
        match self {
            // E‖row‖² = tr(R_H) = Σ r_k
            Self::GaussianPrior { sqrt_spectrum } => sqrt_spectrum.iter().map(|s| s * s).sum::<f64>() / n,
            Self::DeterministicLos(h) => frobenius_sq(h) / (n * n),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelMatrix {
        match self {
            Self::DeterministicLos(h) => ChannelMatrix(h.clone()),
            Self::GaussianPrior { sqrt_spectrum } => {
                let n = sqrt_spectrum.len();
                let white = white_matrix(rng, n, n);
                let scale = 1.0 / (n as f64).sqrt();
                let mut h = CMatrix::zeros(n, n);
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                for r in 0..n {
                    for (k, b) in buf.iter_mut().enumerate() {
                        *b = white[(r, k)] * sqrt_spectrum[k];
                    }
                    for (c, v) in idft_any(&buf).into_iter().enumerate() {
                        h[(r, c)] = v * scale;
                    }
                }
                ChannelMatrix(h)
            }
        }
    }
}

/// One gaussian-prior channel draw with row covariance `ccm`.
pub fn sample_channel<R: Rng + ?Sized>(ccm: &HermitianCirculant, rng: &mut R) -> Result<ChannelMatrix> {
    Ok(ChannelSampler::gaussian(ccm)?.sample(rng))
}

/// `Σ‖Ĥ_t - H_t‖² / Σ‖H_t‖²`.
pub fn nmse(estimates: &[CMatrix], truths: &[CMatrix]) -> Result<f64> {
    if estimates.len() != truths.len() {
        return Err(Error::Dimension(format!(
            "{} estimates for {} channels",
            estimates.len(),
            truths.len()
        )));
    }
    let mut err = 0.0;
    let mut power = 0.0;
    for (e, t) in estimates.iter().zip(truths) {
        if e.shape() != t.shape() {
            return Err(Error::Dimension("estimate and channel shapes differ".into()));
        }
        err += frobenius_sq(&(e - t));
        power += frobenius_sq(t);
    }
    if power == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(err / power)
}

/// Expected NMSE of the known-covariance LMMSE estimator under the
/// gaussian-prior model: `Σ r σ²/(r + σ²) / Σ r`.
pub fn analytic_mmse(ccm: &HermitianCirculant, noise: NoiseModel) -> Result<f64> {
    analytic_mmse_from_spectrum(&eigenvalues_via_dft(ccm)?, noise)
}

pub fn analytic_mmse_from_spectrum(spectrum: &SpectralFilter, noise: NoiseModel) -> Result<f64> {
    let r: Vec<f64> = spectrum.real_parts().into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = r.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let s2 = noise.sigma2;
    Ok(r.iter().map(|&v| v * s2 / (v + s2)).sum::<f64>() / total)
}

/// Noise variance for a target SNR given the mean per-entry channel power.
pub fn sigma2_for_snr(mean_entry_power: f64, snr_db: f64) -> f64 {
    mean_entry_power * 10f64.powf(-snr_db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scene: UcaConfig,
    pub t_slots: usize,
    pub snr_points_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub channel_mode: ChannelMode,
    pub methods: Vec<Method>,
    /// Run the full pilot transmission and correlation with this pilot
    /// length; `None` injects `Ỹ = H + Ñ` directly.
    pub pilot_length: Option<usize>,
}

impl ExperimentConfig {
    /// Reference geometry with desk-scale defaults: T = 10, 2000 trials,
    /// SNR from -10 to 20 dB in 5 dB steps.
    pub fn desk(n_antennas: usize, methods: Vec<Method>) -> Self {
        Self {
            scene: UcaConfig::reference(n_antennas),
            t_slots: 10,
            snr_points_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            trials: 2000,
            seed: 0,
            channel_mode: ChannelMode::GaussianPrior,
            methods,
            pilot_length: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        if self.t_slots == 0 {
            return Err(Error::InvalidConfig("need at least one slot".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("need at least one trial".into()));
        }
        if self.snr_points_db.is_empty() || self.snr_points_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("SNR list must be non-empty and finite".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no estimators selected".into()));
        }
        if self.methods.iter().any(|m| m.is_spectral()) {
            self.scene.validate_for_fft()?;
        }
        if let Some(l) = self.pilot_length {
            if l < self.scene.n_antennas {
                return Err(Error::InvalidConfig(format!(
                    "pilot length {l} is shorter than the antenna count {}",
                    self.scene.n_antennas
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsePoint {
    pub method: Method,
    pub snr_db: f64,
    pub nmse_mean: f64,
    pub nmse_stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmseCurve {
    /// Grouped by method (in configuration order), then by SNR.
    pub points: Vec<NmsePoint>,
    /// Noise variance used at each configured SNR point.
    pub sigma2: Vec<f64>,
    pub mean_entry_power: f64,
}

impl NmseCurve {
    pub fn get(&self, method: Method, snr_db: f64) -> Option<&NmsePoint> {
        self.points.iter().find(|p| p.method == method && p.snr_db == snr_db)
    }

    pub fn series(&self, method: Method) -> Vec<&NmsePoint> {
        self.points.iter().filter(|p| p.method == method).collect()
    }
}

/// Per-SNR state shared by all trials.
struct SnrPlan {
    noise: NoiseModel,
    known_gains: Option<Vec<Complex64>>,
    known_dense: Option<CMatrix>,
}

/// Neumaier-free pairwise summation; the split points depend only on the
/// length, so the result is the same for every schedule.
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct Sweep<'a> {
    cfg: &'a ExperimentConfig,
    sampler: ChannelSampler,
    pilots: Option<PilotMatrix>,
    plan: Option<Radix2Fft>,
    snr: Vec<SnrPlan>,
}

impl Sweep<'_> {
    /// NMSE for every `(snr, method)` pair of one trial, SNR-major.
    fn trial(&self, trial: usize) -> Result<Vec<f64>> {
        let cfg = self.cfg;
        let n = cfg.scene.n_antennas;
        let noise_cols = self.pilots.as_ref().map_or(n, |p| p.pilot_length());
        let mut channels = Vec::with_capacity(cfg.t_slots);
        let mut white = Vec::with_capacity(cfg.t_slots);
        for slot in 0..cfg.t_slots {
            let key = |role| StreamKey::new(cfg.seed, trial as u64, slot as u64, role);
            channels.push(self.sampler.sample(&mut key(StreamRole::Channel).rng()).into_inner());
            white.push(white_matrix(&mut key(StreamRole::Noise).rng(), n, noise_cols));
        }

        let mut out = Vec::with_capacity(self.snr.len() * cfg.methods.len());
        for plan in &self.snr {
            let sigma = Complex64::new(plan.noise.sigma2.sqrt(), 0.0);
            let observations: Vec<CMatrix> = channels
                .iter()
                .zip(&white)
                .map(|(h, w)| match &self.pilots {
                    Some(p) => correlate(&received(h, p, w * sigma), p),
                    None => Ok(h + w * sigma),
                })
                .collect::<Result<_>>()?;
            let batch = ObservationBatch::new(observations, plan.noise)?;

            for &method in &cfg.methods {
                let estimates = self.estimate(method, plan, &batch).map_err(|e| {
                    Error::InvalidConfig(format!("trial {trial}, method {method}: {e}"))
                })?;
                out.push(nmse(&estimates, &channels)?);
            }
        }
        Ok(out)
    }

    fn estimate(&self, method: Method, plan: &SnrPlan, batch: &ObservationBatch) -> Result<Vec<CMatrix>> {
        let obs = batch.observations();
        let spectral = |gains: &[Complex64]| -> Result<Vec<CMatrix>> {
            let fft = self.plan.as_ref().ok_or(Error::NotPowerOfTwo(batch.size()))?;
            obs.iter()
                .map(|y| {
                    let mut e = y.clone();
                    apply_with_plan(fft, &mut e, gains)?;
                    Ok(e)
                })
                .collect()
        };
        match method {
            Method::Ls => Ok(obs.to_vec()),
            Method::LmmseSwpKnown => spectral(plan.known_gains.as_deref().expect("prepared")),
            Method::LmmseDirectKnown => {
                let a = plan.known_dense.as_ref().expect("prepared");
                Ok(obs.iter().map(|y| y * a).collect())
            }
            Method::LmmseSwpUnknown => {
                let gains = unknown_swp_filter(&ml_spectral_eigs(batch)?, plan.noise);
                spectral(gains.values())
            }
            Method::LmmseDirectUnknown => {
                let a = direct_unknown_operator(batch)?;
                Ok(obs.iter().map(|y| y * &a).collect())
            }
        }
    }
}

/// Runs the sweep on the default thread pool.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<NmseCurve> {
    run_sweep_with_workers(cfg, None)
}

/// Runs the sweep with an explicit worker count (`None` = library default).
/// Output is bitwise identical for every worker count.
pub fn run_sweep_with_workers(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<NmseCurve> {
    cfg.validate()?;
    let ccm = build_ccm(&cfg.scene)?;
    let sampler = ChannelSampler::for_mode(cfg.channel_mode, &cfg.scene, &ccm)?;
    let mean_entry_power = sampler.mean_entry_power();
    let needs_spectrum = cfg.methods.contains(&Method::LmmseSwpKnown);
    let needs_dense = cfg.methods.contains(&Method::LmmseDirectKnown);
    let spectrum = if needs_spectrum { Some(eigenvalues_via_dft(&ccm)?) } else { None };
    let dense_ccm = if needs_dense { Some(ccm.expand()) } else { None };

    let mut sigma2 = Vec::with_capacity(cfg.snr_points_db.len());
    let mut snr = Vec::with_capacity(cfg.snr_points_db.len());
    for &snr_db in &cfg.snr_points_db {
        let s2 = sigma2_for_snr(mean_entry_power, snr_db);
        let noise = NoiseModel::new(s2)?;
        sigma2.push(s2);
        snr.push(SnrPlan {
            noise,
            known_gains: spectrum.as_ref().map(|s| known_swp_filter(s, noise).values().to_vec()),
            known_dense: dense_ccm.as_ref().map(|r| direct_known_operator(r, noise)).transpose()?,
        });
    }

    let sweep = Sweep {
        cfg,
        sampler,
        pilots: cfg
            .pilot_length
            .map(|l| make_pilots(cfg.scene.n_antennas, l))
            .transpose()?,
        plan: Radix2Fft::new(cfg.scene.n_antennas).ok(),
        snr,
    };

    let per_trial = run_trials(&sweep, cfg.trials, workers)?;

    let n_methods = cfg.methods.len();
    let mut points = Vec::with_capacity(n_methods * cfg.snr_points_db.len());
    for (mi, &method) in cfg.methods.iter().enumerate() {
        for (si, &snr_db) in cfg.snr_points_db.iter().enumerate() {
            let values: Vec<f64> = per_trial.iter().map(|row| row[si * n_methods + mi]).collect();
            let (nmse_mean, nmse_stderr) = mean_and_stderr(&values);
            points.push(NmsePoint {
                method,
                snr_db,
                nmse_mean,
                nmse_stderr,
                trials: cfg.trials,
            });
        }
    }
    Ok(NmseCurve {
        points,
        sigma2,
        mean_entry_power,
    })
}

#[cfg(feature = "parallel")]
fn run_trials(sweep: &Sweep<'_>, trials: usize, workers: Option<usize>) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    let work = || (0..trials).into_par_iter().map(|t| sweep.trial(t)).collect::<Result<Vec<_>>>();
    match workers {
        None => work(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {k} workers: {e}")))?
            .install(work),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_trials(sweep: &Sweep<'_>, trials: usize, _workers: Option<usize>) -> Result<Vec<Vec<f64>>> {
    (0..trials).map(|t| sweep.trial(t)).collect()
}
