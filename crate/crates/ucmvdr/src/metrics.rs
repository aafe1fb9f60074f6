//! Beamformer performance metrics: beampattern, notch depth, white noise
//! gain, interferer output power and empirical CDF summaries.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::array::{steering_vector, Scene, UlaConfig};
use crate::beamformer::{BeamformerMethod, WeightVector};
use crate::covariance::CovarianceMatrix;
use crate::{CVector, Error, Result, C64};

/// Floor applied to dB quantities so that exact nulls stay finite in CSV
/// output.
pub const DB_FLOOR: f64 = -400.0;

/// A beampattern sampled on a direction-cosine grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BeampatternSamples {
    u_grid: Vec<f64>,
    values: Vec<C64>,
    power_db: Vec<f64>,
}

impl BeampatternSamples {
    pub fn u_grid(&self) -> &[f64] {
        &self.u_grid
    }

    /// Complex gains B(u).
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// 20 log10 |B(u)|, floored at [`DB_FLOOR`].
    pub fn power_db(&self) -> &[f64] {
        &self.power_db
    }

    pub fn len(&self) -> usize {
        self.u_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_grid.is_empty()
    }
}

/// Complex beampattern values B(u) = w^H v(u) for a raw weight vector.
///
/// The grid must stay within [-1, 1]; ordering is not required here, only
/// [`beampattern`] insists on a strictly increasing grid.
pub fn beampattern_values(weights: &CVector, cfg: &UlaConfig, u_grid: &[f64]) -> Result<Vec<C64>> {
    u_grid
        .iter()
        .map(|&u| {
            let v = steering_vector(cfg, u)?;
            Ok((weights.adjoint() * v)[(0, 0)])
        })
        .collect()
}

/// Samples the beampattern of a distortionless weight vector on a strictly
/// increasing grid.
pub fn beampattern(w: &WeightVector, u_grid: &[f64]) -> Result<BeampatternSamples> {
    if u_grid.is_empty() {
        return Err(Error::EmptyInput("beampattern grid"));
    }
    if u_grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidConfig(
            "beampattern grid must be strictly increasing".into(),
        ));
    }
    let values = beampattern_values(w.weights(), w.config(), u_grid)?;
    let power_db = values.iter().map(|b| db_power(b.norm_sqr())).collect();
    Ok(BeampatternSamples {
        u_grid: u_grid.to_vec(),
        values,
        power_db,
    })
}

pub(crate) fn db_power(power: f64) -> f64 {
    if power > 0.0 {
        (10.0 * power.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Notch depth 10 log10 |B(u1)|^2 at the interferer direction, floored at
/// [`DB_FLOOR`].
pub fn notch_depth_db(w: &WeightVector, u_interferer: f64) -> Result<f64> {
    let b = beampattern_values(w.weights(), w.config(), &[u_interferer])?[0];
    Ok(db_power(b.norm_sqr()))
}

/// White noise gain 1 / ||w||^2 of a distortionless weight vector. Equals N
/// exactly when w is the CBF, and never exceeds N.
pub fn white_noise_gain(w: &WeightVector) -> f64 {
    1.0 / w.weights().norm_squared()
}

/// Beamformer output power attributable to one scene source:
/// sigma_i^2 |B(u_i)|^2.
pub fn interferer_output_power(
    w: &WeightVector,
    scene: &Scene,
    source_index: usize,
) -> Result<f64> {
    if scene.sources().is_empty() {
        return Err(Error::EmptyInput("scene has no sources"));
    }
    let source = scene.source(source_index)?;
    let b = beampattern_values(w.weights(), w.config(), &[source.direction_u()])?[0];
    Ok(source.power() * b.norm_sqr())
}

/// Total beamformer output power w^H Sigma w against a covariance.
pub fn total_output_power(w: &WeightVector, cov: &CovarianceMatrix) -> Result<f64> {
    if cov.n_sensors() != w.n_sensors() {
        return Err(Error::DimensionMismatch {
            cov: cov.n_sensors(),
            array: w.n_sensors(),
        });
    }
    Ok((w.weights().adjoint() * cov.matrix() * w.weights())[(0, 0)].re)
}

/// Right-continuous empirical CDF: the k-th order statistic is paired with
/// probability k/n.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("empirical CDF samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("CDF samples must not be NaN"));
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(k, value)| (value, (k + 1) as f64 / n))
        .collect())
}

/// Lower median: the order statistic where the ECDF first reaches 1/2.
/// For [1, 2, 3, 4] this is 2.
pub fn lower_median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("median samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("median samples must not be NaN"));
    Ok(sorted[(sorted.len() - 1) / 2])
}

/// Metrics for one beamformer within one Monte Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodMetrics {
    /// sigma_1^2 |B(u_1)|^2 for the reported interferer.
    pub interferer_output_power: f64,
    pub wng: f64,
    pub notch_depth_db: f64,
    /// w^H Sigma w against the ensemble covariance.
    pub total_output_power: f64,
}

/// Per-trial results keyed by method; failures are recorded, not fatal.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub outcomes: BTreeMap<BeamformerMethod, std::result::Result<MethodMetrics, String>>,
}

impl TrialRecord {
    pub fn metrics(&self, method: BeamformerMethod) -> Option<&MethodMetrics> {
        match self.outcomes.get(&method) {
            Some(Ok(m)) => Some(m),
            _ => None,
        }
    }

    /// Checks the record invariants: WNG in (0, N] and nonnegative powers.
    pub fn validate(&self, n_sensors: usize) -> Result<()> {
        for (method, outcome) in &self.outcomes {
            if let Ok(m) = outcome {
                let ok = m.wng > 0.0
                    && m.wng <= n_sensors as f64 + 1e-9
                    && m.interferer_output_power >= 0.0
                    && m.total_output_power >= 0.0;
                if !ok {
                    return Err(Error::InvalidConfig(format!(
                        "trial {} method {method} violates metric bounds: {m:?}",
                        self.trial_index
                    )));
                }
            }
        }
        Ok(())
    }
}
