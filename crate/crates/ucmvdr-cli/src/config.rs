//! Experiment configuration and its flat key-value file format.
//!
//! The format is line-oriented and diff-friendly:
//!
//! ```text
//! # comment (also allowed after a value)
//! [array]
//! n_sensors = 11
//! spacing_wavelengths = 0.5      # optional, defaults to 0.5
//! look_direction_u = 0.0         # optional, defaults to 0.0
//!
//! [scene]
//! noise_power = 1.0
//! source = 3/11, 1e4             # direction cosine, linear power; repeatable
//!
//! [experiment]
//! n_snapshots = 12
//! n_trials = 5000
//! seed = 11235
//! methods = cbf, smi, dl, uc
//! dl_policy = match_mean_wng:1000   # or fixed:<delta>; required when dl is run
//! output_dir = out/paper_fig3
//! ```
//!
//! Numeric values accept plain decimals, scientific notation and exact
//! rationals written `a/b` (so `3/11` survives the text round trip without
//! decimal truncation). Unknown sections or keys are errors.

use std::path::{Path, PathBuf};

use serde::Serialize;
use ucmvdr::array::{Scene, SourceSpec, UlaConfig};
use ucmvdr::beamformer::BeamformerMethod;

use crate::{Error, Result};

/// Policy for choosing the diagonal loading factor of the DL beamformer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DlPolicy {
    /// Use this loading factor as-is.
    Fixed(f64),
    /// Calibrate the loading on pilot trials so the DL mean WNG matches the
    /// pilot-set UC mean WNG.
    MatchMeanWng { pilot_trials: usize },
}

/// A full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub ula: UlaConfig,
    pub scene: Scene,
    pub n_snapshots: usize,
    pub n_trials: u64,
    pub seed: u64,
    pub methods: Vec<BeamformerMethod>,
    pub dl_policy: Option<DlPolicy>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(crate::io_err(path))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses the config text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut builder = Builder::new(origin);
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw_line).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(section) = line.strip_prefix('[') {
                let section = section
                    .strip_suffix(']')
                    .ok_or_else(|| builder.err(line_no, "unterminated section header"))?;
                builder.enter_section(section.trim(), line_no)?;
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| builder.err(line_no, "expected `key = value`"))?;
            builder.set(key.trim(), value.trim(), line_no)?;
        }
        builder.finish()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 1 {
            return Err(Error::Invalid("n_trials must be at least 1".into()));
        }
        if self.n_snapshots < 1 {
            return Err(Error::Invalid("n_snapshots must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Invalid("methods must not be empty".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for m in &self.methods {
            if !seen.insert(*m) {
                return Err(Error::Invalid(format!("method {m} listed twice")));
            }
        }
        if self.methods.contains(&BeamformerMethod::Dl) && self.dl_policy.is_none() {
            return Err(Error::Invalid(
                "running the dl method requires a dl_policy".into(),
            ));
        }
        if let Some(DlPolicy::Fixed(delta)) = self.dl_policy {
            if !delta.is_finite() || delta < 0.0 {
                return Err(Error::Invalid(format!(
                    "fixed dl factor must be nonnegative, got {delta}"
                )));
            }
        }
        if let Some(DlPolicy::MatchMeanWng { pilot_trials }) = self.dl_policy {
            if pilot_trials < 100 {
                return Err(Error::Invalid(format!(
                    "match_mean_wng needs at least 100 pilot trials, got {pilot_trials}"
                )));
            }
        }
        if self.scene.sources().is_empty() {
            return Err(Error::Invalid(
                "the experiment scene needs at least one source (the reported interferer)".into(),
            ));
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// Parses a float, also accepting the exact rational form `a/b`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("invalid number `{num}`"))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| format!("invalid number `{den}`"))?;
        if d == 0.0 {
            return Err("division by zero in rational value".into());
        }
        Ok(n / d)
    } else {
        s.parse().map_err(|_| format!("invalid number `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Array,
    Scene,
    Experiment,
}

struct Builder {
    origin: String,
    section: Section,
    n_sensors: Option<usize>,
    spacing: f64,
    look_u: f64,
    noise_power: Option<f64>,
    sources: Vec<(f64, f64)>,
    n_snapshots: Option<usize>,
    n_trials: Option<u64>,
    seed: Option<u64>,
    methods: Option<Vec<BeamformerMethod>>,
    dl_policy: Option<DlPolicy>,
    output_dir: Option<PathBuf>,
}

impl Builder {
    fn new(origin: &str) -> Self {
        Self {
            origin: origin.to_string(),
            section: Section::None,
            n_sensors: None,
            spacing: 0.5,
            look_u: 0.0,
            noise_power: None,
            sources: Vec::new(),
            n_snapshots: None,
            n_trials: None,
            seed: None,
            methods: None,
            dl_policy: None,
            output_dir: None,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Config {
            path: self.origin.clone(),
            line,
            message: message.into(),
        }
    }

    fn enter_section(&mut self, name: &str, line: usize) -> Result<()> {
        self.section = match name {
            "array" => Section::Array,
            "scene" => Section::Scene,
            "experiment" => Section::Experiment,
            other => return Err(self.err(line, format!("unknown section [{other}]"))),
        };
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let num = |b: &Self| parse_number(value).map_err(|m| b.err(line, m));
        match (self.section, key) {
            (Section::Array, "n_sensors") => {
                self.n_sensors = Some(
                    value
                        .parse()
                        .map_err(|_| self.err(line, format!("invalid integer `{value}`")))?,
                );
            }
            (Section::Array, "spacing_wavelengths") => self.spacing = num(self)?,
            (Section::Array, "look_direction_u") => self.look_u = num(self)?,
            (Section::Scene, "noise_power") => self.noise_power = Some(num(self)?),
            (Section::Scene, "source") => {
                let (u, p) = value
                    .split_once(',')
                    .ok_or_else(|| self.err(line, "source needs `direction_u, power`"))?;
                let u = parse_number(u.trim()).map_err(|m| self.err(line, m))?;
                let p = parse_number(p.trim()).map_err(|m| self.err(line, m))?;
                self.sources.push((u, p));
            }
            (Section::Experiment, "n_snapshots") => {
                self.n_snapshots = Some(
                    value
                        .parse()
                        .map_err(|_| self.err(line, format!("invalid integer `{value}`")))?,
                );
            }
            (Section::Experiment, "n_trials") => {
                self.n_trials = Some(
                    value
                        .parse()
                        .map_err(|_| self.err(line, format!("invalid integer `{value}`")))?,
                );
            }
            (Section::Experiment, "seed") => {
                self.seed = Some(
                    value
                        .parse()
                        .map_err(|_| self.err(line, format!("invalid integer `{value}`")))?,
                );
            }
            (Section::Experiment, "methods") => {
                let mut methods = Vec::new();
                for part in value.split(',') {
                    let m = part
                        .trim()
                        .parse::<BeamformerMethod>()
                        .map_err(|m| self.err(line, m))?;
                    methods.push(m);
                }
                self.methods = Some(methods);
            }
            (Section::Experiment, "dl_policy") => {
                self.dl_policy = Some(self.parse_dl_policy(value, line)?);
            }
            (Section::Experiment, "output_dir") => {
                self.output_dir = Some(PathBuf::from(value));
            }
            (Section::None, _) => {
                return Err(self.err(line, "key outside any section"));
            }
            (_, other) => {
                return Err(self.err(line, format!("unknown key `{other}`")));
            }
        }
        Ok(())
    }

    fn parse_dl_policy(&self, value: &str, line: usize) -> Result<DlPolicy> {
        if let Some(rest) = value.strip_prefix("fixed:") {
            let delta = parse_number(rest.trim()).map_err(|m| self.err(line, m))?;
            return Ok(DlPolicy::Fixed(delta));
        }
        if let Some(rest) = value.strip_prefix("match_mean_wng:") {
            let pilots = rest
                .trim()
                .parse()
                .map_err(|_| self.err(line, format!("invalid pilot count `{rest}`")))?;
            return Ok(DlPolicy::MatchMeanWng {
                pilot_trials: pilots,
            });
        }
        Err(self.err(
            line,
            format!(
                "invalid dl_policy `{value}` (expected fixed:<delta> or match_mean_wng:<pilots>)"
            ),
        ))
    }

    fn finish(self) -> Result<ExperimentConfig> {
        let missing = |what: &str| Error::Invalid(format!("{}: missing {what}", self.origin));
        let n_sensors = self.n_sensors.ok_or_else(|| missing("[array] n_sensors"))?;
        let ula = UlaConfig::new(n_sensors, self.spacing, self.look_u)?;
        let noise = self
            .noise_power
            .ok_or_else(|| missing("[scene] noise_power"))?;
        let sources = self
            .sources
            .iter()
            .map(|&(u, p)| SourceSpec::new(u, p))
            .collect::<ucmvdr::Result<Vec<_>>>()?;
        let scene = Scene::new(sources, noise)?;
        let config = ExperimentConfig {
            ula,
            scene,
            n_snapshots: self
                .n_snapshots
                .ok_or_else(|| missing("[experiment] n_snapshots"))?,
            n_trials: self
                .n_trials
                .ok_or_else(|| missing("[experiment] n_trials"))?,
            seed: self.seed.ok_or_else(|| missing("[experiment] seed"))?,
            methods: self
                .methods
                .ok_or_else(|| missing("[experiment] methods"))?,
            dl_policy: self.dl_policy,
            output_dir: self
                .output_dir
                .ok_or_else(|| missing("[experiment] output_dir"))?,
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
# demo config
[array]
n_sensors = 11
spacing_wavelengths = 0.5
look_direction_u = 0.0

[scene]
noise_power = 1.0
source = 3/11, 1e4

[experiment]
n_snapshots = 12
n_trials = 100
seed = 7
methods = cbf, smi, dl, uc
dl_policy = match_mean_wng:100
output_dir = out
"#;

    #[test]
    fn parses_a_complete_config() {
        let cfg = ExperimentConfig::parse(GOOD, "test").unwrap();
        assert_eq!(cfg.ula.n_sensors(), 11);
        assert_eq!(cfg.scene.sources().len(), 1);
        assert_eq!(cfg.scene.sources()[0].direction_u(), 3.0 / 11.0);
        assert_eq!(cfg.scene.sources()[0].power(), 1e4);
        assert_eq!(cfg.n_trials, 100);
        assert_eq!(
            cfg.methods,
            vec![
                BeamformerMethod::Cbf,
                BeamformerMethod::Smi,
                BeamformerMethod::Dl,
                BeamformerMethod::Uc
            ]
        );
        assert_eq!(
            cfg.dl_policy,
            Some(DlPolicy::MatchMeanWng { pilot_trials: 100 })
        );
    }

    #[test]
    fn rational_values_are_exact() {
        assert_eq!(parse_number("3/11").unwrap(), 3.0 / 11.0);
        assert_eq!(parse_number("1e4").unwrap(), 1.0e4);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let bad = GOOD.replace("n_trials", "trials_n");
        match ExperimentConfig::parse(&bad, "test") {
            Err(Error::Config { line, .. }) => assert!(line > 0),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn dl_method_requires_policy() {
        let bad = GOOD.replace("dl_policy = match_mean_wng:100\n", "");
        assert!(matches!(
            ExperimentConfig::parse(&bad, "test"),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let with_comments = GOOD.replace("seed = 7", "seed = 7   # master seed");
        let cfg = ExperimentConfig::parse(&with_comments, "test").unwrap();
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn duplicate_methods_rejected() {
        let bad = GOOD.replace("cbf, smi, dl, uc", "uc, uc");
        assert!(ExperimentConfig::parse(&bad, "test").is_err());
    }

    #[test]
    fn scene_requires_a_source() {
        let bad = GOOD.replace("source = 3/11, 1e4\n", "");
        assert!(matches!(
            ExperimentConfig::parse(&bad, "test"),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn core_validation_propagates() {
        let bad = GOOD.replace("n_sensors = 11", "n_sensors = 1");
        assert!(matches!(
            ExperimentConfig::parse(&bad, "test"),
            Err(Error::Core(_))
        ));
    }
}
