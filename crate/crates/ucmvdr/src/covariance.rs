//! Covariance estimates: sample covariance, diagonal loading and calibration
//! of the loading factor against a target mean white noise gain.

use rayon::prelude::*;
use serde::Serialize;

use crate::array::{self, Scene, SnapshotMatrix, UlaConfig};
use crate::{beamformer, metrics, CMatrix, Error, Result, C64};

/// Relative tolerance for the Hermitian symmetry check.
const HERMITIAN_REL_TOL: f64 = 1e-12;

/// Eigenvalues may undershoot zero by this fraction of the trace before the
/// matrix is rejected as indefinite.
const PSD_FLOOR_REL: f64 = 1e-10;

/// Provenance of a covariance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CovarianceKind {
    /// Exact ensemble statistics.
    Ensemble,
    /// Sample covariance matrix averaged over snapshots.
    Sample,
    /// Diagonally loaded sample covariance.
    Loaded,
}

/// An N x N Hermitian positive-semidefinite covariance with its provenance.
///
/// The base matrix and the accumulated loading are stored separately and
/// combined on access, which keeps repeated loading exactly associative:
/// loading by `a` then `b` materializes the same matrix as loading by
/// `a + b` once.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    base: CMatrix,
    kind: CovarianceKind,
    loading_factor: f64,
    snapshots_used: usize,
    base_min_eigenvalue: f64,
}

impl CovarianceMatrix {
    /// Wraps an externally produced matrix, verifying that it is Hermitian
    /// (to 1e-12 relative) and positive semidefinite (eigenvalues above
    /// -1e-10 times the trace).
    pub fn new(matrix: CMatrix, kind: CovarianceKind) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::InvalidConfig(format!(
                "covariance must be square and nonempty, got {} x {}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut scale: f64 = 0.0;
        let mut asym: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                let a = matrix[(r, c)];
                let b = matrix[(c, r)];
                scale = scale.max(a.norm()).max(b.norm());
                asym = asym.max((a - b.conj()).norm());
            }
        }
        if scale > 0.0 && asym > HERMITIAN_REL_TOL * scale {
            return Err(Error::NotHermitian {
                asymmetry: asym / scale,
            });
        }
        // Exact symmetrization so downstream algebra sees a true Hermitian.
        let mut base = matrix;
        for r in 0..n {
            base[(r, r)] = C64::new(base[(r, r)].re, 0.0);
            for c in (r + 1)..n {
                let v = base[(r, c)];
                base[(c, r)] = v.conj();
            }
        }
        let out = Self::from_exact_hermitian(base, kind, 0.0, 0);
        let min = out.base_min_eigenvalue;
        let floor = -PSD_FLOOR_REL * out.trace().abs();
        if min < floor {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
        Ok(out)
    }

    /// Internal constructor for matrices that are Hermitian by construction.
    pub(crate) fn from_exact_hermitian(
        base: CMatrix,
        kind: CovarianceKind,
        loading_factor: f64,
        snapshots_used: usize,
    ) -> Self {
        let base_min_eigenvalue = base
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        Self {
            base,
            kind,
            loading_factor,
            snapshots_used,
            base_min_eigenvalue,
        }
    }

    /// Materializes the (loaded) covariance matrix.
    pub fn matrix(&self) -> CMatrix {
        let mut m = self.base.clone();
        if self.loading_factor != 0.0 {
            for i in 0..m.nrows() {
                m[(i, i)] = C64::new(m[(i, i)].re + self.loading_factor, 0.0);
            }
        }
        m
    }

    pub fn n_sensors(&self) -> usize {
        self.base.nrows()
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn loading_factor(&self) -> f64 {
        self.loading_factor
    }

    /// Snapshot count behind a sample estimate; 0 for ensemble matrices.
    pub fn snapshots_used(&self) -> usize {
        self.snapshots_used
    }

    pub fn trace(&self) -> f64 {
        (0..self.base.nrows())
            .map(|i| self.base[(i, i)].re + self.loading_factor)
            .sum()
    }

    /// Eigenvalues of the loaded matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Smallest eigenvalue of the loaded matrix. Loading shifts the spectrum
    /// by exactly the loading factor, so this needs no fresh eigensolve.
    pub fn min_eigenvalue(&self) -> f64 {
        self.base_min_eigenvalue + self.loading_factor
    }
}

/// Sample covariance matrix (1/L) X X^H of a snapshot set.
///
/// Assembled from the upper triangle so the result is Hermitian to the last
/// bit.
pub fn sample_covariance(snapshots: &SnapshotMatrix) -> CovarianceMatrix {
    let x = snapshots.data();
    let n = x.nrows();
    let l = x.ncols();
    let inv_l = 1.0 / l as f64;
    let mut m = CMatrix::zeros(n, n);
    for r in 0..n {
        let mut diag = 0.0;
        for k in 0..l {
            diag += x[(r, k)].norm_sqr();
        }
        m[(r, r)] = C64::new(diag * inv_l, 0.0);
        for c in (r + 1)..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..l {
                acc += x[(r, k)] * x[(c, k)].conj();
            }
            acc *= inv_l;
            m[(r, c)] = acc;
            m[(c, r)] = acc.conj();
        }
    }
    CovarianceMatrix::from_exact_hermitian(m, CovarianceKind::Sample, 0.0, l)
}

/// Adds `delta` to the diagonal, producing a `Loaded` estimate.
///
/// Loading factors accumulate: loading twice is exactly loading once by the
/// sum.
pub fn diagonal_load(cov: &CovarianceMatrix, delta: f64) -> Result<CovarianceMatrix> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::NegativeLoading(delta));
    }
    Ok(CovarianceMatrix {
        base: cov.base.clone(),
        kind: CovarianceKind::Loaded,
        loading_factor: cov.loading_factor + delta,
        snapshots_used: cov.snapshots_used,
        base_min_eigenvalue: cov.base_min_eigenvalue,
    })
}

/// Mean white noise gain of the DL MVDR beamformer at loading `delta`,
/// averaged over `n_pilot_trials` pilot snapshot sets drawn from
/// `mix_seed(seed, trial)`.
pub fn dl_mean_wng(
    cfg: &UlaConfig,
    scene: &Scene,
    n_snapshots: usize,
    n_pilot_trials: usize,
    delta: f64,
    seed: u64,
) -> Result<f64> {
    let scms = pilot_scms(cfg, scene, n_snapshots, n_pilot_trials, seed)?;
    mean_wng_at(&scms, cfg, delta)
}

/// Calibrates the diagonal loading factor so that the pilot-set mean WNG of
/// the DL MVDR beamformer matches `target_mean_wng` to 1% relative.
///
/// Mean WNG is empirically monotone nondecreasing in the loading, so the
/// search bisects on log10(delta) over [1e-6, 1e6] times the noise power.
/// Targets outside the achievable bracket are an error that reports the
/// achievable range.
pub fn calibrate_dl_factor(
    cfg: &UlaConfig,
    scene: &Scene,
    n_snapshots: usize,
    n_pilot_trials: usize,
    target_mean_wng: f64,
    seed: u64,
) -> Result<f64> {
    let n = cfg.n_sensors() as f64;
    if !(target_mean_wng > 0.0 && target_mean_wng <= n) {
        return Err(Error::InvalidConfig(format!(
            "target mean WNG must lie in (0, {n}], got {target_mean_wng}"
        )));
    }
    if n_pilot_trials < 100 {
        return Err(Error::InvalidConfig(format!(
            "DL calibration needs at least 100 pilot trials, got {n_pilot_trials}"
        )));
    }

    let scms = pilot_scms(cfg, scene, n_snapshots, n_pilot_trials, seed)?;
    let lo_delta = 1e-6 * scene.noise_power();
    let hi_delta = 1e6 * scene.noise_power();
    let f_lo = mean_wng_at(&scms, cfg, lo_delta)?;
    let f_hi = mean_wng_at(&scms, cfg, hi_delta)?;

    const REL_TOL: f64 = 0.01;
    let close = |wng: f64| (wng - target_mean_wng).abs() <= REL_TOL * target_mean_wng;
    if close(f_lo) {
        return Ok(lo_delta);
    }
    if close(f_hi) {
        return Ok(hi_delta);
    }
    if target_mean_wng < f_lo || target_mean_wng > f_hi {
        return Err(Error::CalibrationOutOfRange {
            target: target_mean_wng,
            min_achievable: f_lo,
            max_achievable: f_hi,
        });
    }

    let mut lo = lo_delta.log10();
    let mut hi = hi_delta.log10();
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let wng = mean_wng_at(&scms, cfg, 10f64.powf(mid))?;
        if close(wng) {
            return Ok(10f64.powf(mid));
        }
        if wng < target_mean_wng {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // 64 halvings shrink the bracket far below any practical tolerance, so
    // reaching this means the mean WNG is not monotone around the target.
    Err(Error::CalibrationOutOfRange {
        target: target_mean_wng,
        min_achievable: f_lo,
        max_achievable: f_hi,
    })
}

fn pilot_scms(
    cfg: &UlaConfig,
    scene: &Scene,
    n_snapshots: usize,
    n_pilot_trials: usize,
    seed: u64,
) -> Result<Vec<CovarianceMatrix>> {
    (0..n_pilot_trials as u64)
        .into_par_iter()
        .map(|trial| {
            let snaps =
                array::generate_snapshots(cfg, scene, n_snapshots, array::mix_seed(seed, trial))?;
            Ok(sample_covariance(&snaps))
        })
        .collect()
}

fn mean_wng_at(scms: &[CovarianceMatrix], cfg: &UlaConfig, delta: f64) -> Result<f64> {
    // Collect per-pilot values in order and sum sequentially: a parallel
    // reduction would make the mean depend on the thread schedule.
    let values: Result<Vec<f64>> = scms
        .par_iter()
        .map(|scm| {
            let loaded = diagonal_load(scm, delta)?;
            let w = beamformer::mvdr_weights(&loaded, cfg)?;
            Ok(metrics::white_noise_gain(&w))
        })
        .collect();
    Ok(values?.iter().sum::<f64>() / scms.len() as f64)
}
