//! Browser demo for the `swp-lmmse` crate.
//!
//! Three operations are exported to JavaScript, each returning a flat
//! `Float64Array` that the page in `www/` draws on a canvas:
//!
//! - [`ccm_spectrum_db`]: eigenvalues of the channel covariance for a scene
//! - [`complexity_curves`]: log10 MADs of the four LMMSE variants against N
//! - [`nmse_curves`]: a small seeded Monte-Carlo NMSE sweep
//!
//! The computations live in plain functions so they can be tested natively;
//! the `#[wasm_bindgen]` wrappers only convert errors.

use swp_lmmse::circulant::eigenvalues_via_dft;
use swp_lmmse::complexity::{sweep_mads, ComplexityMethod};
use swp_lmmse::geometry::build_ccm;
use swp_lmmse::sim::run_sweep;
use swp_lmmse::{ChannelMode, ExperimentConfig, Method, UcaConfig};
use wasm_bindgen::prelude::*;

/// Antenna counts on the complexity plot.
pub const COMPLEXITY_N: [u64; 9] = [16, 32, 64, 128, 256, 512, 1024, 2048, 4096];

/// Estimators on the NMSE plot, in output order.
pub const NMSE_METHODS: [Method; 3] = [Method::Ls, Method::LmmseSwpUnknown, Method::LmmseSwpKnown];

/// Upper bound on `trials * slots * N²` so a click never freezes the tab.
pub const MAX_SWEEP_WORK: usize = 50_000_000;

fn scene(n: usize, freq_ghz: f64, rt: f64, rr: f64, d: f64) -> Result<UcaConfig, String> {
    UcaConfig::new(n, rt, rr, d, freq_ghz * 1e9).map_err(|e| e.to_string())
}

/// Covariance eigenvalues in DFT-bin order, in dB relative to the largest.
/// Non-positive values are floored at -300 dB.
pub fn spectrum_db(n: usize, freq_ghz: f64, rt: f64, rr: f64, d: f64) -> Result<Vec<f64>, String> {
    let ccm = build_ccm(&scene(n, freq_ghz, rt, rr, d)?).map_err(|e| e.to_string())?;
    let r = eigenvalues_via_dft(&ccm).map_err(|e| e.to_string())?.real_parts();
    let peak = r.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
    Ok(r.iter()
        .map(|&v| if v > 0.0 { (10.0 * (v / peak).log10()).max(-300.0) } else { -300.0 })
        .collect())
}

/// Rows of `[n, swp-known, swp-unknown, direct-known, direct-unknown]` in
/// log10 MADs, one row per entry of [`COMPLEXITY_N`], flattened.
pub fn mads_table(t: u64) -> Result<Vec<f64>, String> {
    let methods = [
        ComplexityMethod::SwpKnown,
        ComplexityMethod::SwpUnknown,
        ComplexityMethod::DirectKnown,
        ComplexityMethod::DirectUnknown,
    ];
    let rows = sweep_mads(&methods, &COMPLEXITY_N, t).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(rows.len() + COMPLEXITY_N.len());
    for (n, chunk) in COMPLEXITY_N.iter().zip(rows.chunks(methods.len())) {
        out.push(*n as f64);
        out.extend(chunk.iter().map(|r| r.log10_mads));
    }
    Ok(out)
}

/// Rows of `[snr_db, ls, swp-unknown, swp-known]` NMSE means for the
/// reference geometry, flattened.
pub fn sweep_table(n: usize, t: usize, trials: usize, seed: u64, snr_db: &[f64]) -> Result<Vec<f64>, String> {
    if trials.saturating_mul(t).saturating_mul(n * n) > MAX_SWEEP_WORK {
        return Err(format!("sweep too large for the browser: reduce N, T or trials (limit {MAX_SWEEP_WORK} entries)"));
    }
    let cfg = ExperimentConfig {
        scene: UcaConfig::reference(n),
        t_slots: t,
        snr_points_db: snr_db.to_vec(),
        trials,
        seed,
        channel_mode: ChannelMode::GaussianPrior,
        methods: NMSE_METHODS.to_vec(),
        pilot_length: None,
    };
    let curve = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(snr_db.len() * (1 + NMSE_METHODS.len()));
    for &snr in snr_db {
        out.push(snr);
        for m in NMSE_METHODS {
            out.push(curve.get(m, snr).map(|p| p.nmse_mean).unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn ccm_spectrum_db(n: usize, freq_ghz: f64, rt: f64, rr: f64, d: f64) -> Result<Vec<f64>, JsError> {
    spectrum_db(n, freq_ghz, rt, rr, d).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn complexity_curves(t: u32) -> Result<Vec<f64>, JsError> {
    mads_table(t as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn nmse_curves(n: usize, t: usize, trials: usize, seed: u32, snr_db: Vec<f64>) -> Result<Vec<f64>, JsError> {
    sweep_table(n, t, trials, seed as u64, &snr_db).map_err(|e| JsError::new(&e))
}
