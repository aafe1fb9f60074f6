//! Adaptive beamforming for uniform linear arrays (ULAs), built around the
//! unit-circle MVDR beamformer.
//!
//! A narrowband ULA beamformer is an FIR filter in disguise: the z-transform
//! of its conjugate weights is a degree N-1 polynomial whose values on the
//! unit circle are the beampattern. The ensemble MVDR beamformer places all
//! of its polynomial zeros on the unit circle, but the sample-matrix-inversion
//! (SMI) MVDR computed from a finite snapshot set does not. The unit-circle
//! MVDR (UC MVDR) beamformer repairs this: it roots the SMI weight polynomial,
//! projects every zero radially onto the unit circle (zeros inside the
//! main-lobe sector move to the first-null angle instead), rebuilds the
//! weights from the projected zeros and renormalizes to unity gain at the
//! look direction. The result has perfect nulls and, at low snapshot counts,
//! substantially better white noise gain than plain SMI.
//!
//! The crate provides:
//!
//! * [`array`] — ULA geometry, steering vectors, scene description, ensemble
//!   covariance and synthetic snapshot generation;
//! * [`covariance`] — sample covariance, diagonal loading and calibration of
//!   the loading factor against a target mean white noise gain;
//! * [`polynomial`] — weight-vector/zero-set/coefficient conversions, complex
//!   root finding and the radial unit-circle projection;
//! * [`beamformer`] — CBF, MVDR/SMI/DL and UC MVDR weight computation;
//! * [`metrics`] — beampattern evaluation, notch depth, white noise gain,
//!   interferer output power and empirical CDFs.
//!
//! ```
//! use ucmvdr::array::{self, Scene, SourceSpec, UlaConfig};
//! use ucmvdr::{beamformer, covariance, metrics};
//!
//! let ula = UlaConfig::half_wavelength(11, 0.0)?;
//! let scene = Scene::new(vec![SourceSpec::new(3.0 / 11.0, 1.0e4)?], 1.0)?;
//!
//! // Snapshot-starved SMI against the unit-circle repair.
//! let snapshots = array::generate_snapshots(&ula, &scene, 12, 42)?;
//! let scm = covariance::sample_covariance(&snapshots);
//! let smi = beamformer::mvdr_weights(&scm, &ula)?;
//! let uc = beamformer::uc_mvdr(&scm, &ula)?;
//! assert!(metrics::white_noise_gain(&uc.weights) > 0.0);
//! assert!(metrics::white_noise_gain(&smi) <= 11.0 + 1e-9);
//! # Ok::<(), ucmvdr::Error>(())
//! ```

pub mod array;
pub mod beamformer;
pub mod covariance;
mod error;
pub mod metrics;
pub mod polynomial;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
