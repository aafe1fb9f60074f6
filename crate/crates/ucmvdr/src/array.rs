//! ULA geometry, steering vectors, scene description and synthetic snapshots.
//!
//! Directions are direction cosines u = cos(theta) throughout; the physical
//! angle theta is never represented. All randomness flows through a seedable
//! counter-style generator so that every value in the crate is a pure
//! function of (inputs, seed).

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::covariance::{CovarianceKind, CovarianceMatrix};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Geometry and look direction of a uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UlaConfig {
    n_sensors: usize,
    spacing_wavelengths: f64,
    look_direction_u: f64,
}

impl UlaConfig {
    /// Creates a ULA description. Spacings above half a wavelength admit
    /// grating lobes and are rejected here; use
    /// [`UlaConfig::with_grating_spacing`] to opt in explicitly.
    pub fn new(n_sensors: usize, spacing_wavelengths: f64, look_direction_u: f64) -> Result<Self> {
        if spacing_wavelengths > 0.5 {
            return Err(Error::InvalidConfig(format!(
                "spacing d/lambda = {spacing_wavelengths} exceeds 0.5 (grating lobes); \
                 use with_grating_spacing to override"
            )));
        }
        Self::with_grating_spacing(n_sensors, spacing_wavelengths, look_direction_u)
    }

    /// Like [`UlaConfig::new`] but allows d/lambda > 0.5.
    pub fn with_grating_spacing(
        n_sensors: usize,
        spacing_wavelengths: f64,
        look_direction_u: f64,
    ) -> Result<Self> {
        if n_sensors < 2 {
            return Err(Error::InvalidConfig(format!(
                "array needs at least 2 sensors, got {n_sensors}"
            )));
        }
        if !spacing_wavelengths.is_finite() || spacing_wavelengths <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "spacing d/lambda must be positive and finite, got {spacing_wavelengths}"
            )));
        }
        check_direction(look_direction_u)?;
        Ok(Self {
            n_sensors,
            spacing_wavelengths,
            look_direction_u,
        })
    }

    /// Standard d = lambda/2 array.
    pub fn half_wavelength(n_sensors: usize, look_direction_u: f64) -> Result<Self> {
        Self::new(n_sensors, 0.5, look_direction_u)
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn spacing_wavelengths(&self) -> f64 {
        self.spacing_wavelengths
    }

    pub fn look_direction_u(&self) -> f64 {
        self.look_direction_u
    }

    /// Steering vector toward the look direction.
    pub fn look_steering(&self) -> CVector {
        steering_unchecked(self, self.look_direction_u)
    }
}

/// One planewave source: direction cosine and linear power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceSpec {
    direction_u: f64,
    power: f64,
}

impl SourceSpec {
    pub fn new(direction_u: f64, power: f64) -> Result<Self> {
        check_direction(direction_u)?;
        if !power.is_finite() || power < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "source power must be finite and nonnegative, got {power}"
            )));
        }
        Ok(Self { direction_u, power })
    }

    pub fn direction_u(&self) -> f64 {
        self.direction_u
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

/// A set of uncorrelated planewave sources in spatially white noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scene {
    sources: Vec<SourceSpec>,
    noise_power: f64,
}

impl Scene {
    /// A scene may be noise-only (no sources), but the noise power must be
    /// strictly positive.
    pub fn new(sources: Vec<SourceSpec>, noise_power: f64) -> Result<Self> {
        if !noise_power.is_finite() || noise_power <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise power must be finite and positive, got {noise_power}"
            )));
        }
        Ok(Self {
            sources,
            noise_power,
        })
    }

    pub fn noise_only(noise_power: f64) -> Result<Self> {
        Self::new(Vec::new(), noise_power)
    }

    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn source(&self, index: usize) -> Result<&SourceSpec> {
        self.sources.get(index).ok_or(Error::SourceIndexOutOfRange {
            index,
            n_sources: self.sources.len(),
        })
    }
}

/// N x L matrix of array snapshots together with the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: CMatrix,
    seed: u64,
}

impl SnapshotMatrix {
    /// Wraps externally supplied snapshot data (one column per snapshot).
    /// The seed is recorded as provenance only.
    pub fn from_data(data: CMatrix, seed: u64) -> Result<Self> {
        if data.ncols() < 1 || data.nrows() < 1 {
            return Err(Error::InvalidSnapshotCount);
        }
        Ok(Self { data, seed })
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_sensors(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_snapshots(&self) -> usize {
        self.data.ncols()
    }
}

fn check_direction(u: f64) -> Result<()> {
    if u.is_finite() && u.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::DirectionOutOfRange { value: u })
    }
}

fn steering_unchecked(cfg: &UlaConfig, u: f64) -> CVector {
    let phase_step = -2.0 * PI * cfg.spacing_wavelengths * u;
    CVector::from_fn(cfg.n_sensors, |n, _| {
        C64::from_polar(1.0, phase_step * n as f64)
    })
}

/// Steering (array manifold) vector for direction cosine `u`.
///
/// Element n is exp(-j 2 pi (d/lambda) n u); element 0 is 1 and the
/// Euclidean norm is sqrt(N).
pub fn steering_vector(cfg: &UlaConfig, u: f64) -> Result<CVector> {
    check_direction(u)?;
    Ok(steering_unchecked(cfg, u))
}

/// Ensemble covariance of a scene: sum of sigma_i^2 v_i v_i^H plus
/// sigma_w^2 I.
///
/// The matrix is assembled from its upper triangle so that it is Hermitian
/// to the last bit, and it is positive definite because the noise power is
/// strictly positive.
pub fn ensemble_covariance(cfg: &UlaConfig, scene: &Scene) -> CovarianceMatrix {
    let n = cfg.n_sensors;
    let steerings: Vec<CVector> = scene
        .sources
        .iter()
        .map(|s| steering_unchecked(cfg, s.direction_u))
        .collect();

    let mut m = CMatrix::zeros(n, n);
    for r in 0..n {
        let mut diag = scene.noise_power;
        for (src, v) in scene.sources.iter().zip(&steerings) {
            diag += src.power * v[r].norm_sqr();
        }
        m[(r, r)] = C64::new(diag, 0.0);
        for c in (r + 1)..n {
            let mut acc = C64::new(0.0, 0.0);
            for (src, v) in scene.sources.iter().zip(&steerings) {
                acc += v[r] * v[c].conj() * C64::new(src.power, 0.0);
            }
            m[(r, c)] = acc;
            m[(c, r)] = acc.conj();
        }
    }
    CovarianceMatrix::from_exact_hermitian(m, CovarianceKind::Ensemble, 0.0, 0)
}

/// Draws `n_snapshots` independent snapshots of the scene.
///
/// Each column is sum_i a_i v_i + n with a_i ~ CN(0, sigma_i^2) redrawn per
/// snapshot and n spatially white CN(0, sigma_w^2 I). Complex Gaussians are
/// realized as independent N(0, sigma^2/2) real and imaginary parts. The
/// draw order (per snapshot: source amplitudes, then per-element noise) is
/// part of the determinism contract: the same (cfg, scene, n_snapshots,
/// seed) always yields a bit-identical matrix.
pub fn generate_snapshots(
    cfg: &UlaConfig,
    scene: &Scene,
    n_snapshots: usize,
    seed: u64,
) -> Result<SnapshotMatrix> {
    if n_snapshots < 1 {
        return Err(Error::InvalidSnapshotCount);
    }
    let n = cfg.n_sensors;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut draw = move || -> f64 { normal.sample(&mut rng) };

    let steerings: Vec<CVector> = scene
        .sources
        .iter()
        .map(|s| steering_unchecked(cfg, s.direction_u))
        .collect();
    let amp_scales: Vec<f64> = scene
        .sources
        .iter()
        .map(|s| (s.power / 2.0).sqrt())
        .collect();
    let noise_scale = (scene.noise_power / 2.0).sqrt();

    let mut data = CMatrix::zeros(n, n_snapshots);
    for col in 0..n_snapshots {
        for (v, scale) in steerings.iter().zip(&amp_scales) {
            let amp = C64::new(draw(), draw()) * C64::new(*scale, 0.0);
            for row in 0..n {
                data[(row, col)] += amp * v[row];
            }
        }
        for row in 0..n {
            data[(row, col)] += C64::new(draw(), draw()) * C64::new(noise_scale, 0.0);
        }
    }
    Ok(SnapshotMatrix { data, seed })
}

/// SplitMix64 finalizer; bijective on u64.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives the seed for an indexed sub-stream (a Monte Carlo trial, a pilot
/// trial, ...) from a base seed.
///
/// Defined as `splitmix64(seed ^ splitmix64(index))`: the index is diffused
/// to 64 bits before it touches the seed, so low-entropy seeds and indices
/// still give unrelated streams, and the result is independent of how trials
/// are scheduled across threads.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}
