//! Monte Carlo trial execution and summary statistics.
//!
//! Trials are pure functions of (config, trial index): the per-trial seed is
//! `mix_seed(config.seed, trial_index)`, so results are reproducible across
//! any level of parallelism. Pilot trials used for DL calibration draw from
//! a salted seed stream, disjoint from the evaluation trials.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use ucmvdr::array::{self, mix_seed, splitmix64};
use ucmvdr::beamformer::{self, BeamformerMethod, WeightVector};
use ucmvdr::covariance::{self, CovarianceMatrix};
use ucmvdr::metrics::{self, MethodMetrics, TrialRecord};
use ucmvdr::polynomial::{ArrayPolynomial, Zero};

use crate::config::{DlPolicy, ExperimentConfig};
use crate::{Error, Result};

/// Salt separating the pilot seed stream from evaluation trials.
const PILOT_STREAM_SALT: u64 = 0x5049_4C4F_5453_5452; // "PILOTSTR"

/// Base seed of the pilot stream derived from an experiment seed. Pilot
/// trial i then uses `mix_seed(pilot_seed(seed), i)`.
pub fn pilot_seed(seed: u64) -> u64 {
    splitmix64(seed ^ PILOT_STREAM_SALT)
}

/// Index of the source whose output power and notch depth are reported.
pub const INTERFERER_INDEX: usize = 0;

/// Runtime knobs that do not affect results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Number of rayon worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

/// Ensemble (infinite-snapshot) reference values for the configured scene.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnsembleReference {
    pub wng: f64,
    pub interferer_output_power: f64,
    pub notch_depth_db: f64,
}

/// Aggregates over the successful trials of one method.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MethodSummary {
    pub mean_interferer_output_power: f64,
    pub median_interferer_output_power: f64,
    pub mean_wng: f64,
    pub n_failed: u64,
}

/// Everything `summary.json` carries.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub n_trials: u64,
    pub seed: u64,
    pub n_snapshots: usize,
    pub n_sensors: usize,
    /// Loading factor actually used by the DL method, if DL ran.
    pub dl_factor: Option<f64>,
    /// Pilot-set UC mean WNG that the DL calibration targeted, if any.
    pub pilot_uc_mean_wng: Option<f64>,
    pub ensemble: EnsembleReference,
    pub methods: BTreeMap<String, MethodSummary>,
}

/// Immutable per-run state shared by all trials.
pub struct TrialContext {
    config: ExperimentConfig,
    ensemble: CovarianceMatrix,
    cbf: WeightVector,
    ensemble_mvdr: WeightVector,
    dl_factor: Option<f64>,
    pilot_uc_mean_wng: Option<f64>,
}

impl TrialContext {
    /// Validates the config, computes the ensemble references and resolves
    /// the DL policy (running the pilot calibration when asked to match the
    /// UC mean WNG).
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let ensemble = array::ensemble_covariance(&config.ula, &config.scene);
        let cbf = beamformer::cbf_weights(&config.ula);
        let ensemble_mvdr = beamformer::mvdr_weights(&ensemble, &config.ula)?;

        let needs_dl = config.methods.contains(&BeamformerMethod::Dl);
        let (dl_factor, pilot_uc_mean_wng) = match (needs_dl, config.dl_policy) {
            (false, _) => (None, None),
            (true, Some(DlPolicy::Fixed(delta))) => (Some(delta), None),
            (true, Some(DlPolicy::MatchMeanWng { pilot_trials })) => {
                let pilot = pilot_seed(config.seed);
                let target = pilot_uc_mean_wng(config, pilot_trials, pilot)?;
                let delta = covariance::calibrate_dl_factor(
                    &config.ula,
                    &config.scene,
                    config.n_snapshots,
                    pilot_trials,
                    target,
                    pilot,
                )?;
                (Some(delta), Some(target))
            }
            (true, None) => {
                return Err(Error::Invalid(
                    "running the dl method requires a dl_policy".into(),
                ))
            }
        };

        Ok(Self {
            config: config.clone(),
            ensemble,
            cbf,
            ensemble_mvdr,
            dl_factor,
            pilot_uc_mean_wng,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn dl_factor(&self) -> Option<f64> {
        self.dl_factor
    }

    pub fn pilot_uc_mean_wng(&self) -> Option<f64> {
        self.pilot_uc_mean_wng
    }

    pub fn ensemble_reference(&self) -> Result<EnsembleReference> {
        Ok(EnsembleReference {
            wng: metrics::white_noise_gain(&self.ensemble_mvdr),
            interferer_output_power: metrics::interferer_output_power(
                &self.ensemble_mvdr,
                &self.config.scene,
                INTERFERER_INDEX,
            )?,
            notch_depth_db: metrics::notch_depth_db(
                &self.ensemble_mvdr,
                self.config.scene.source(INTERFERER_INDEX)?.direction_u(),
            )?,
        })
    }

    /// Weight vectors of one trial, keyed by method. Methods that fail keep
    /// their error message.
    pub fn trial_weights(
        &self,
        trial_index: u64,
    ) -> Result<BTreeMap<BeamformerMethod, std::result::Result<WeightVector, String>>> {
        let seed = mix_seed(self.config.seed, trial_index);
        let snapshots = array::generate_snapshots(
            &self.config.ula,
            &self.config.scene,
            self.config.n_snapshots,
            seed,
        )?;
        let scm = covariance::sample_covariance(&snapshots);

        let mut out = BTreeMap::new();
        for &method in &self.config.methods {
            let weights = match method {
                BeamformerMethod::Cbf => Ok(self.cbf.clone()),
                BeamformerMethod::Mvdr => Ok(self.ensemble_mvdr.clone()),
                BeamformerMethod::Smi => {
                    beamformer::mvdr_weights(&scm, &self.config.ula).map_err(|e| e.to_string())
                }
                BeamformerMethod::Dl => {
                    let delta = self.dl_factor.expect("validated: dl implies a factor");
                    covariance::diagonal_load(&scm, delta)
                        .and_then(|loaded| beamformer::mvdr_weights(&loaded, &self.config.ula))
                        .map_err(|e| e.to_string())
                }
                BeamformerMethod::Uc => beamformer::uc_mvdr(&scm, &self.config.ula)
                    .map(|sol| sol.weights)
                    .map_err(|e| e.to_string()),
            };
            out.insert(method, weights);
        }
        Ok(out)
    }

    /// Zero multisets of one trial for the zero-location CSV artifacts. UC
    /// zeros come straight from the projection (radius exactly 1); the other
    /// methods are re-rooted from their weights.
    pub fn trial_zeros(&self, trial_index: u64) -> Result<BTreeMap<BeamformerMethod, Vec<Zero>>> {
        let seed = mix_seed(self.config.seed, trial_index);
        let snapshots = array::generate_snapshots(
            &self.config.ula,
            &self.config.scene,
            self.config.n_snapshots,
            seed,
        )?;
        let scm = covariance::sample_covariance(&snapshots);

        let mut out = BTreeMap::new();
        for &method in &self.config.methods {
            let zeros = match method {
                BeamformerMethod::Uc => {
                    beamformer::uc_mvdr(&scm, &self.config.ula)?.unit_circle_zeros
                }
                _ => {
                    let weights = match method {
                        BeamformerMethod::Cbf => self.cbf.clone(),
                        BeamformerMethod::Mvdr => self.ensemble_mvdr.clone(),
                        BeamformerMethod::Smi => beamformer::mvdr_weights(&scm, &self.config.ula)?,
                        BeamformerMethod::Dl => {
                            let delta = self.dl_factor.expect("validated: dl implies a factor");
                            let loaded = covariance::diagonal_load(&scm, delta)?;
                            beamformer::mvdr_weights(&loaded, &self.config.ula)?
                        }
                        BeamformerMethod::Uc => unreachable!(),
                    };
                    ArrayPolynomial::from_weights(&weights)?.zeros().to_vec()
                }
            };
            out.insert(method, zeros);
        }
        Ok(out)
    }
}

/// Runs one trial: generate snapshots, estimate, beamform, measure.
pub fn run_trial(ctx: &TrialContext, trial_index: u64) -> Result<TrialRecord> {
    let seed = mix_seed(ctx.config.seed, trial_index);
    let u1 = ctx.config.scene.source(INTERFERER_INDEX)?.direction_u();
    let weights = ctx.trial_weights(trial_index)?;

    let mut outcomes = BTreeMap::new();
    for (method, outcome) in weights {
        let metrics_result = outcome.and_then(|w| {
            let interferer_output_power =
                metrics::interferer_output_power(&w, &ctx.config.scene, INTERFERER_INDEX)
                    .map_err(|e| e.to_string())?;
            let notch_depth_db = metrics::notch_depth_db(&w, u1).map_err(|e| e.to_string())?;
            let total_output_power =
                metrics::total_output_power(&w, &ctx.ensemble).map_err(|e| e.to_string())?;
            Ok(MethodMetrics {
                interferer_output_power,
                wng: metrics::white_noise_gain(&w),
                notch_depth_db,
                total_output_power,
            })
        });
        outcomes.insert(method, metrics_result);
    }
    Ok(TrialRecord {
        trial_index,
        seed,
        outcomes,
    })
}

/// Runs all trials of the experiment (in parallel) and aggregates them.
/// Records come back ordered by trial index regardless of thread count.
pub fn run_trials(ctx: &TrialContext, opts: &RunOptions) -> Result<Vec<TrialRecord>> {
    let indices: Vec<u64> = (0..ctx.config.n_trials).collect();
    let work = || -> Result<Vec<TrialRecord>> {
        indices
            .par_iter()
            .map(|&i| run_trial(ctx, i))
            .collect::<Result<Vec<_>>>()
    };
    match opts.threads {
        None => work(),
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Invalid(format!("failed to build thread pool: {e}")))?;
            pool.install(work)
        }
    }
}

/// Builds the summary from the trial records. Statistics use the successful
/// trials of each method; failures only bump `n_failed`.
pub fn summarize(ctx: &TrialContext, records: &[TrialRecord]) -> Result<ExperimentSummary> {
    let mut methods = BTreeMap::new();
    for &method in &ctx.config.methods {
        let mut powers = Vec::with_capacity(records.len());
        let mut wngs = Vec::with_capacity(records.len());
        let mut n_failed = 0u64;
        for record in records {
            match record.outcomes.get(&method) {
                Some(Ok(m)) => {
                    powers.push(m.interferer_output_power);
                    wngs.push(m.wng);
                }
                Some(Err(_)) => n_failed += 1,
                None => {}
            }
        }
        if powers.is_empty() {
            return Err(Error::Invalid(format!(
                "method {method} failed in every trial"
            )));
        }
        methods.insert(
            method.to_string(),
            MethodSummary {
                mean_interferer_output_power: mean(&powers),
                median_interferer_output_power: metrics::lower_median(&powers)?,
                mean_wng: mean(&wngs),
                n_failed,
            },
        );
    }
    Ok(ExperimentSummary {
        n_trials: ctx.config.n_trials,
        seed: ctx.config.seed,
        n_snapshots: ctx.config.n_snapshots,
        n_sensors: ctx.config.ula.n_sensors(),
        dl_factor: ctx.dl_factor,
        pilot_uc_mean_wng: ctx.pilot_uc_mean_wng,
        ensemble: ctx.ensemble_reference()?,
        methods,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pilot-set UC mean WNG: the calibration target for `match_mean_wng`.
/// Values are collected in pilot order and summed sequentially so the mean
/// does not depend on the thread schedule.
fn pilot_uc_mean_wng(
    config: &ExperimentConfig,
    pilot_trials: usize,
    pilot_seed: u64,
) -> Result<f64> {
    let values: Result<Vec<f64>> = (0..pilot_trials as u64)
        .into_par_iter()
        .map(|i| {
            let snaps = array::generate_snapshots(
                &config.ula,
                &config.scene,
                config.n_snapshots,
                mix_seed(pilot_seed, i),
            )?;
            let scm = covariance::sample_covariance(&snaps);
            let w = beamformer::uc_mvdr_weights(&scm, &config.ula)?;
            Ok(metrics::white_noise_gain(&w))
        })
        .collect();
    Ok(values?.iter().sum::<f64>() / pilot_trials as f64)
}

/// Runs the whole experiment: trials, summary and every CSV/JSON artifact in
/// the output directory. Fails before any trial runs if the directory is not
/// writable.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentSummary> {
    let ctx = TrialContext::new(config)?;
    crate::output::prepare_output_dir(&config.output_dir)?;
    let records = run_trials(&ctx, opts)?;
    let summary = summarize(&ctx, &records)?;
    crate::output::write_all_artifacts(&ctx, &records, &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn small_config(methods: &str, trials: u64) -> ExperimentConfig {
        let text = format!(
            r#"
[array]
n_sensors = 11

[scene]
noise_power = 1.0
source = 3/11, 1e4

[experiment]
n_snapshots = 12
n_trials = {trials}
seed = 90210
methods = {methods}
output_dir = unused
"#
        );
        ExperimentConfig::parse(&text, "test").unwrap()
    }

    #[test]
    fn cbf_records_are_data_independent() {
        let ctx = TrialContext::new(&small_config("cbf", 4)).unwrap();
        let first = run_trial(&ctx, 0).unwrap();
        for i in 1..4 {
            let record = run_trial(&ctx, i).unwrap();
            assert_eq!(
                record.metrics(BeamformerMethod::Cbf),
                first.metrics(BeamformerMethod::Cbf)
            );
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let ctx = TrialContext::new(&small_config("cbf, smi, uc", 1)).unwrap();
        let a = run_trial(&ctx, 0).unwrap();
        let b = run_trial(&ctx, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uc_wng_stays_within_bounds() {
        let ctx = TrialContext::new(&small_config("uc", 16)).unwrap();
        for i in 0..16 {
            let record = run_trial(&ctx, i).unwrap();
            record.validate(11).unwrap();
            let wng = record.metrics(BeamformerMethod::Uc).unwrap().wng;
            assert!(wng > 0.0 && wng <= 11.0 + 1e-9, "trial {i}: WNG {wng}");
        }
    }

    #[test]
    fn summary_of_single_trial_equals_that_trial() {
        let ctx = TrialContext::new(&small_config("cbf, smi", 1)).unwrap();
        let records = run_trials(&ctx, &RunOptions::default()).unwrap();
        let summary = summarize(&ctx, &records).unwrap();
        let smi = records[0].metrics(BeamformerMethod::Smi).unwrap();
        let s = &summary.methods["smi"];
        assert_eq!(s.mean_interferer_output_power, smi.interferer_output_power);
        assert_eq!(
            s.median_interferer_output_power,
            smi.interferer_output_power
        );
        assert_eq!(s.mean_wng, smi.wng);
    }

    #[test]
    fn records_are_ordered_regardless_of_thread_count() {
        let config = small_config("smi", 32);
        let ctx = TrialContext::new(&config).unwrap();
        let serial = run_trials(&ctx, &RunOptions { threads: Some(1) }).unwrap();
        let parallel = run_trials(&ctx, &RunOptions { threads: Some(4) }).unwrap();
        assert_eq!(serial, parallel);
        for (i, record) in serial.iter().enumerate() {
            assert_eq!(record.trial_index, i as u64);
        }
    }

    #[test]
    fn ensemble_reference_regression_constants() {
        // Deterministic ensemble quantities for the reference scene, frozen
        // from a direct evaluation of the weight formula.
        let ctx = TrialContext::new(&small_config("cbf", 1)).unwrap();
        let reference = ctx.ensemble_reference().unwrap();
        assert!((reference.wng - 10.473213).abs() < 1e-5);
        let expected_power = 4.365991463062881e-8;
        assert!(
            (reference.interferer_output_power - expected_power).abs() < 1e-6 * expected_power,
            "ensemble interferer power {}",
            reference.interferer_output_power
        );
        assert!((reference.notch_depth_db - (-113.5991711781339)).abs() < 1e-4);
    }

    #[test]
    fn snapshot_starved_trials_record_errors_without_aborting() {
        // L = 6 < N = 11 leaves the SCM singular: SMI and UC must fail per
        // trial while the CBF still reports, and the run itself succeeds.
        let mut config = small_config("cbf, smi, uc", 3);
        config.n_snapshots = 6;
        let ctx = TrialContext::new(&config).unwrap();
        let records = run_trials(&ctx, &RunOptions::default()).unwrap();
        for record in &records {
            assert!(record.metrics(BeamformerMethod::Cbf).is_some());
            for method in [BeamformerMethod::Smi, BeamformerMethod::Uc] {
                match record.outcomes.get(&method) {
                    Some(Err(message)) => {
                        assert!(message.contains("singular"), "unexpected error: {message}")
                    }
                    other => panic!("{method} should fail on a singular SCM, got {other:?}"),
                }
            }
        }
    }
}
