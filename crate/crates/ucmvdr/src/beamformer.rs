//! Weight computation: conventional (CBF), MVDR against ensemble, sample or
//! loaded covariance, and the unit-circle MVDR built by projecting the SMI
//! polynomial zeros onto the unit circle.

use serde::Serialize;

use crate::array::UlaConfig;
use crate::covariance::{CovarianceKind, CovarianceMatrix};
use crate::polynomial::{self, ArrayPolynomial, Zero};
use crate::{CVector, Error, Result};

/// Tolerance on |w^H v0| = 1 for the distortionless invariant.
const DISTORTIONLESS_TOL: f64 = 1e-10;

/// How a weight vector was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BeamformerMethod {
    /// Conventional delay-and-sum beamformer.
    Cbf,
    /// MVDR with the ensemble covariance.
    Mvdr,
    /// MVDR with a sample covariance (sample matrix inversion).
    Smi,
    /// MVDR with a diagonally loaded sample covariance.
    Dl,
    /// Unit-circle MVDR.
    Uc,
}

impl BeamformerMethod {
    pub const ALL: [BeamformerMethod; 5] = [
        BeamformerMethod::Cbf,
        BeamformerMethod::Mvdr,
        BeamformerMethod::Smi,
        BeamformerMethod::Dl,
        BeamformerMethod::Uc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BeamformerMethod::Cbf => "cbf",
            BeamformerMethod::Mvdr => "mvdr",
            BeamformerMethod::Smi => "smi",
            BeamformerMethod::Dl => "dl",
            BeamformerMethod::Uc => "uc",
        }
    }
}

impl std::fmt::Display for BeamformerMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BeamformerMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cbf" => Ok(BeamformerMethod::Cbf),
            "mvdr" => Ok(BeamformerMethod::Mvdr),
            "smi" => Ok(BeamformerMethod::Smi),
            "dl" => Ok(BeamformerMethod::Dl),
            "uc" => Ok(BeamformerMethod::Uc),
            other => Err(format!(
                "unknown beamformer method '{other}' (expected cbf, mvdr, smi, dl or uc)"
            )),
        }
    }
}

/// Length-N complex weights with unity gain magnitude at the look direction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: CVector,
    method: BeamformerMethod,
    config: UlaConfig,
}

impl WeightVector {
    /// Validates the distortionless constraint |w^H v0| = 1 (to 1e-10) and
    /// finiteness before accepting the weights.
    pub fn new(weights: CVector, method: BeamformerMethod, config: UlaConfig) -> Result<Self> {
        if weights.len() != config.n_sensors() {
            return Err(Error::DimensionMismatch {
                cov: weights.len(),
                array: config.n_sensors(),
            });
        }
        if weights
            .iter()
            .any(|w| !w.re.is_finite() || !w.im.is_finite())
        {
            return Err(Error::NotDistortionless { gain: f64::NAN });
        }
        let gain = (weights.adjoint() * config.look_steering())[(0, 0)].norm();
        if (gain - 1.0).abs() > DISTORTIONLESS_TOL {
            return Err(Error::NotDistortionless { gain });
        }
        Ok(Self {
            weights,
            method,
            config,
        })
    }

    pub fn weights(&self) -> &CVector {
        &self.weights
    }

    pub fn method(&self) -> BeamformerMethod {
        self.method
    }

    pub fn config(&self) -> &UlaConfig {
        &self.config
    }

    pub fn look_direction_u(&self) -> f64 {
        self.config.look_direction_u()
    }

    pub fn n_sensors(&self) -> usize {
        self.weights.len()
    }
}

/// Conventional beamformer w = v0 / N. Its white noise gain is N, the
/// optimum over distortionless weights.
pub fn cbf_weights(cfg: &UlaConfig) -> WeightVector {
    let n = cfg.n_sensors() as f64;
    let weights = cfg.look_steering().map(|v| v / n);
    WeightVector::new(weights, BeamformerMethod::Cbf, *cfg)
        .expect("CBF weights are distortionless by construction")
}

/// MVDR weights w = Sigma^-1 v0 / (v0^H Sigma^-1 v0).
///
/// The linear system is solved through a Hermitian Cholesky factorization
/// rather than an explicit inverse. The method tag follows the covariance
/// kind: ensemble -> Mvdr, sample -> Smi, loaded -> Dl. Covariances whose
/// smallest eigenvalue falls below 1e-12 trace/N are rejected as singular.
pub fn mvdr_weights(cov: &CovarianceMatrix, cfg: &UlaConfig) -> Result<WeightVector> {
    if cov.n_sensors() != cfg.n_sensors() {
        return Err(Error::DimensionMismatch {
            cov: cov.n_sensors(),
            array: cfg.n_sensors(),
        });
    }
    let min_eig = cov.min_eigenvalue();
    if min_eig <= 1e-12 * cov.trace() / cfg.n_sensors() as f64 {
        return Err(Error::SingularCovariance {
            min_eigenvalue: min_eig,
        });
    }
    let chol = cov.matrix().cholesky().ok_or(Error::SingularCovariance {
        min_eigenvalue: min_eig,
    })?;
    let v0 = cfg.look_steering();
    let solved = chol.solve(&v0);
    // v0^H Sigma^-1 v0 is real and positive for a positive definite Sigma.
    let denom = (v0.adjoint() * &solved)[(0, 0)].re;
    if !(denom.is_finite() && denom > 0.0) {
        return Err(Error::SingularCovariance {
            min_eigenvalue: min_eig,
        });
    }
    let weights = solved.map(|x| x / denom);
    let method = match cov.kind() {
        CovarianceKind::Ensemble => BeamformerMethod::Mvdr,
        CovarianceKind::Sample => BeamformerMethod::Smi,
        CovarianceKind::Loaded => BeamformerMethod::Dl,
    };
    WeightVector::new(weights, method, *cfg)
}

/// MVDR through the Moore-Penrose pseudo-inverse, for experimenting with
/// rank-deficient covariances (fewer snapshots than sensors). Eigenvalues
/// below 1e-12 times the largest are treated as zero. Not used by the
/// standard pipeline, which refuses singular covariances instead.
pub fn mvdr_weights_pseudo_inverse(
    cov: &CovarianceMatrix,
    cfg: &UlaConfig,
) -> Result<WeightVector> {
    if cov.n_sensors() != cfg.n_sensors() {
        return Err(Error::DimensionMismatch {
            cov: cov.n_sensors(),
            array: cfg.n_sensors(),
        });
    }
    let eig = nalgebra::SymmetricEigen::new(cov.matrix());
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if max_eig <= 0.0 {
        return Err(Error::SingularCovariance {
            min_eigenvalue: cov.min_eigenvalue(),
        });
    }
    let v0 = cfg.look_steering();
    let projected = eig.eigenvectors.adjoint() * &v0;
    let n = cfg.n_sensors();
    let mut scaled = projected;
    for k in 0..n {
        let lambda = eig.eigenvalues[k];
        scaled[k] = if lambda > 1e-12 * max_eig {
            scaled[k] / lambda
        } else {
            crate::C64::new(0.0, 0.0)
        };
    }
    let solved = &eig.eigenvectors * scaled;
    let denom = (v0.adjoint() * &solved)[(0, 0)].re;
    if !(denom.is_finite() && denom > 0.0) {
        return Err(Error::SingularCovariance {
            min_eigenvalue: cov.min_eigenvalue(),
        });
    }
    let weights = solved.map(|x| x / denom);
    let method = match cov.kind() {
        CovarianceKind::Ensemble => BeamformerMethod::Mvdr,
        CovarianceKind::Sample => BeamformerMethod::Smi,
        CovarianceKind::Loaded => BeamformerMethod::Dl,
    };
    WeightVector::new(weights, method, *cfg)
}

/// Everything the unit-circle construction produces: the final weights, the
/// SMI weights it started from and both zero multisets.
#[derive(Debug, Clone)]
pub struct UcMvdrSolution {
    pub weights: WeightVector,
    pub smi_weights: WeightVector,
    /// Zeros of the SMI weight polynomial, generally off the unit circle.
    pub smi_zeros: ArrayPolynomial,
    /// Projected zeros; radius exactly 1 by construction.
    pub unit_circle_zeros: Vec<Zero>,
}

/// Unit-circle MVDR from a sample covariance.
///
/// Pipeline: SMI MVDR weights, z-transform of the conjugate weights, roots,
/// radial projection onto the unit circle with the main-lobe guard
/// (|angle| <= 2 pi / N moves to the first-null angle), re-expansion of the
/// projected zeros into coefficients, conjugation back into weights, and
/// scaling by 1 / |c^H v0| to restore unity gain magnitude at the look
/// direction. The beampattern then has exact nulls at every projected zero
/// angle.
pub fn uc_mvdr(scm: &CovarianceMatrix, cfg: &UlaConfig) -> Result<UcMvdrSolution> {
    if scm.kind() != CovarianceKind::Sample {
        return Err(Error::WrongCovarianceKind {
            expected: CovarianceKind::Sample,
            got: scm.kind(),
        });
    }
    uc_mvdr_pipeline(scm, cfg)
}

/// Unit-circle MVDR that also accepts a diagonally loaded covariance, for
/// experiments that combine loading with the projection.
pub fn uc_mvdr_from_loaded(scm: &CovarianceMatrix, cfg: &UlaConfig) -> Result<UcMvdrSolution> {
    if scm.kind() == CovarianceKind::Ensemble {
        return Err(Error::WrongCovarianceKind {
            expected: CovarianceKind::Sample,
            got: scm.kind(),
        });
    }
    uc_mvdr_pipeline(scm, cfg)
}

/// Convenience wrapper returning only the weights.
pub fn uc_mvdr_weights(scm: &CovarianceMatrix, cfg: &UlaConfig) -> Result<WeightVector> {
    Ok(uc_mvdr(scm, cfg)?.weights)
}

fn uc_mvdr_pipeline(scm: &CovarianceMatrix, cfg: &UlaConfig) -> Result<UcMvdrSolution> {
    if cfg.spacing_wavelengths() != 0.5 {
        return Err(Error::RequiresHalfWavelengthSpacing(
            cfg.spacing_wavelengths(),
        ));
    }
    let smi_weights = mvdr_weights(scm, cfg)?;
    let smi_zeros = ArrayPolynomial::from_weights(&smi_weights)?;
    let unit_circle_zeros =
        polynomial::project_zeros_to_unit_circle(smi_zeros.zeros(), cfg.n_sensors())?;

    // Expansion coefficients are the conjugate weights; undo the conjugation
    // and renormalize by the look-direction gain magnitude. The leading
    // polynomial scale of the SMI polynomial is irrelevant here because this
    // normalization fixes the overall amplitude anyway.
    let expansion = polynomial::zeros_to_coefficients(&unit_circle_zeros);
    let unscaled = CVector::from_iterator(expansion.len(), expansion.iter().map(|c| c.conj()));
    let gain = (unscaled.adjoint() * cfg.look_steering())[(0, 0)].norm();
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::NotDistortionless { gain });
    }
    let weights = unscaled.map(|c| c / gain);
    let weights = WeightVector::new(weights, BeamformerMethod::Uc, *cfg)?;
    Ok(UcMvdrSolution {
        weights,
        smi_weights,
        smi_zeros,
        unit_circle_zeros,
    })
}
