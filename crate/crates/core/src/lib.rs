//! Low-complexity LMMSE channel estimation for line-of-sight links between two
//! parallel, coaxial uniform circular arrays (UCAs) under the spherical wave
//! model.
//!
//! With both ends on a circle the channel covariance matrix is circulant, so
//! it is diagonalized by the unitary DFT matrix. Every LMMSE filter of the
//! form `(R + σ²I)⁻¹R` then collapses to a per-bin gain applied with one
//! forward and one inverse FFT per observation row, replacing the cubic
//! factorization of the direct estimator.
//!
//! Module map:
//!
//! - [`geometry`]: scene description, spherical-wave channel and its covariance
//! - [`fft`]: in-place radix-2 FFT kernel
//! - [`circulant`]: Hermitian circulant matrices and spectral filters
//! - [`estimators`]: LS and the four LMMSE variants
//! - [`complexity`]: closed-form operation counts for the LMMSE variants
//! - [`sim`]: seeded Monte-Carlo harness producing NMSE-versus-SNR curves
//! - [`validate`]: self-check suite used by the CLI

pub mod circulant;
pub mod complexity;
pub mod error;
pub mod estimators;
pub mod fft;
pub mod geometry;
pub mod linalg;
pub mod rng;
pub mod sim;
pub mod validate;

pub use circulant::{HermitianCirculant, SpectralFilter};
pub use error::{Error, Result};
pub use estimators::{EstimateResult, Method, NoiseModel, ObservationBatch};
pub use geometry::{ChannelMatrix, UcaConfig};
pub use linalg::CMatrix;
pub use num_complex::Complex64;
pub use sim::{ChannelMode, ExperimentConfig, NmseCurve};
