//! CSV and JSON artifact writers.
//!
//! Every float is emitted with 17 significant digits (`{:.16e}`), which
//! round-trips f64 exactly: statistics recomputed from `trials.csv` match
//! `summary.json` bit for bit.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ucmvdr::beamformer::BeamformerMethod;
use ucmvdr::metrics::{self, TrialRecord};
use ucmvdr::polynomial::Zero;

use crate::runner::{ExperimentSummary, TrialContext};
use crate::{io_err, Result};

/// 17 significant digits; parses back to the identical f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Creates the output directory and proves it is writable before any trial
/// runs.
pub fn prepare_output_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let probe = dir.join(".write_probe");
    std::fs::write(&probe, b"ok").map_err(io_err(&probe))?;
    std::fs::remove_file(&probe).map_err(io_err(&probe))?;
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    file.write_all(contents.as_bytes()).map_err(io_err(path))?;
    Ok(())
}

/// `trials.csv`: one row per (trial, method).
pub fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut out = String::new();
    out.push_str("trial,seed,method,out_power,wng,nd_db,total_out_power,error\n");
    for record in records {
        for (method, outcome) in &record.outcomes {
            match outcome {
                Ok(m) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},",
                        record.trial_index,
                        record.seed,
                        method,
                        format_float(m.interferer_output_power),
                        format_float(m.wng),
                        format_float(m.notch_depth_db),
                        format_float(m.total_output_power),
                    );
                }
                Err(message) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},,,,,{}",
                        record.trial_index,
                        record.seed,
                        method,
                        message.replace(',', ";"),
                    );
                }
            }
        }
    }
    write_file(path, &out)
}

/// `ecdf_<method>.csv`: right-continuous ECDF of the interferer output power.
pub fn write_ecdf_csv(path: &Path, samples: &[f64]) -> Result<()> {
    let cdf = metrics::empirical_cdf(samples)?;
    let mut out = String::from("value,prob\n");
    for (value, prob) in cdf {
        let _ = writeln!(out, "{},{}", format_float(value), format_float(prob));
    }
    write_file(path, &out)
}

/// `wng_hist.csv`: per-method WNG histogram with 0.25-wide bins over [0, N].
pub fn write_wng_hist_csv(
    path: &Path,
    n_sensors: usize,
    per_method: &[(BeamformerMethod, Vec<f64>)],
) -> Result<()> {
    const BIN_WIDTH: f64 = 0.25;
    let n_bins = (n_sensors as f64 / BIN_WIDTH).ceil() as usize;
    let mut out = String::from("method,bin_lo,bin_hi,count\n");
    for (method, wngs) in per_method {
        let mut counts = vec![0u64; n_bins];
        for &w in wngs {
            let bin = ((w / BIN_WIDTH) as usize).min(n_bins - 1);
            counts[bin] += 1;
        }
        for (k, count) in counts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                method,
                format_float(k as f64 * BIN_WIDTH),
                format_float((k + 1) as f64 * BIN_WIDTH),
                count
            );
        }
    }
    write_file(path, &out)
}

/// `wng_scatter.csv`: per-trial WNG of every configured method, one column
/// per method (empty on failure).
pub fn write_wng_scatter_csv(
    path: &Path,
    methods: &[BeamformerMethod],
    records: &[TrialRecord],
) -> Result<()> {
    let mut out = String::from("trial");
    for m in methods {
        let _ = write!(out, ",wng_{m}");
    }
    out.push('\n');
    for record in records {
        let _ = write!(out, "{}", record.trial_index);
        for m in methods {
            match record.metrics(*m) {
                Some(metrics) => {
                    let _ = write!(out, ",{}", format_float(metrics.wng));
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    write_file(path, &out)
}

/// `beampattern_<method>.csv`: complex gain and dB power on a u grid.
pub fn write_beampattern_csv(path: &Path, samples: &metrics::BeampatternSamples) -> Result<()> {
    let mut out = String::from("u,re,im,db\n");
    for k in 0..samples.len() {
        let b = samples.values()[k];
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_float(samples.u_grid()[k]),
            format_float(b.re),
            format_float(b.im),
            format_float(samples.power_db()[k]),
        );
    }
    write_file(path, &out)
}

/// `zeros_<method>.csv`: polynomial zeros as (angle, radius) rows.
pub fn write_zeros_csv(path: &Path, zeros: &[Zero]) -> Result<()> {
    let mut out = String::from("angle,radius\n");
    for z in zeros {
        let _ = writeln!(
            out,
            "{},{}",
            format_float(z.angle()),
            format_float(z.radius())
        );
    }
    write_file(path, &out)
}

/// `summary.json` with 17-significant-digit floats.
pub fn write_summary_json(path: &Path, summary: &ExperimentSummary) -> Result<()> {
    let mut buffer = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buffer, SigDigitFormatter);
    serde::Serialize::serialize(summary, &mut ser)
        .map_err(|e| crate::Error::Invalid(format!("summary serialization failed: {e}")))?;
    buffer.push(b'\n');
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&buffer).map_err(io_err(path))?;
    Ok(())
}

/// Compact JSON, but floats carry 17 significant digits.
struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// The exemplar trial whose beampattern and zero CSVs are emitted.
pub const EXEMPLAR_TRIAL: u64 = 0;

fn beampattern_grid() -> Vec<f64> {
    const POINTS: usize = 1601;
    (0..POINTS)
        .map(|k| -1.0 + 2.0 * k as f64 / (POINTS - 1) as f64)
        .collect()
}

/// Writes the exemplar-trial beampattern CSVs for the given methods and
/// returns the file paths.
pub fn write_exemplar_beampatterns(
    ctx: &TrialContext,
    trial_index: u64,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let grid = beampattern_grid();
    let weights = ctx.trial_weights(trial_index)?;
    let mut paths = Vec::new();
    for (method, outcome) in weights {
        let w = outcome.map_err(|e| {
            crate::Error::Invalid(format!("exemplar trial failed for {method}: {e}"))
        })?;
        let samples = metrics::beampattern(&w, &grid)?;
        let path = dir.join(format!("beampattern_{method}.csv"));
        write_beampattern_csv(&path, &samples)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes the exemplar-trial zero-location CSVs and returns the file paths.
pub fn write_exemplar_zeros(
    ctx: &TrialContext,
    trial_index: u64,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let zero_sets = ctx.trial_zeros(trial_index)?;
    let mut paths = Vec::new();
    for (method, zeros) in zero_sets {
        let path = dir.join(format!("zeros_{method}.csv"));
        write_zeros_csv(&path, &zeros)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes every artifact of a finished run into the configured output
/// directory.
pub fn write_all_artifacts(
    ctx: &TrialContext,
    records: &[TrialRecord],
    summary: &ExperimentSummary,
) -> Result<()> {
    let dir = &ctx.config().output_dir;
    write_trials_csv(&dir.join("trials.csv"), records)?;

    for &method in &ctx.config().methods {
        let powers: Vec<f64> = records
            .iter()
            .filter_map(|r| r.metrics(method))
            .map(|m| m.interferer_output_power)
            .collect();
        write_ecdf_csv(&dir.join(format!("ecdf_{method}.csv")), &powers)?;
    }

    let wng_sets: Vec<(BeamformerMethod, Vec<f64>)> = ctx
        .config()
        .methods
        .iter()
        .map(|&m| {
            let wngs = records
                .iter()
                .filter_map(|r| r.metrics(m))
                .map(|x| x.wng)
                .collect();
            (m, wngs)
        })
        .collect();
    write_wng_hist_csv(
        &dir.join("wng_hist.csv"),
        ctx.config().ula.n_sensors(),
        &wng_sets,
    )?;
    write_wng_scatter_csv(&dir.join("wng_scatter.csv"), &ctx.config().methods, records)?;

    write_exemplar_beampatterns(ctx, EXEMPLAR_TRIAL, dir)?;
    write_exemplar_zeros(ctx, EXEMPLAR_TRIAL, dir)?;
    write_summary_json(&dir.join("summary.json"), summary)?;
    Ok(())
}
