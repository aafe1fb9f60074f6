//! `ucmvdr` — Monte Carlo experiments for ULA adaptive beamformers.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ucmvdr::beamformer::BeamformerMethod;
use ucmvdr_cli::config::{DlPolicy, ExperimentConfig};
use ucmvdr_cli::output;
use ucmvdr_cli::runner::{self, RunOptions, TrialContext};

#[derive(Parser)]
#[command(
    name = "ucmvdr",
    about = "Monte Carlo experiments comparing CBF, MVDR, SMI, DL and unit-circle MVDR beamformers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Experiment config file
    #[arg(long)]
    config: PathBuf,
    /// Override the number of Monte Carlo trials
    #[arg(long)]
    trials: Option<u64>,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the snapshot count L
    #[arg(long)]
    snapshots: Option<usize>,
    /// Restrict to these methods (repeatable)
    #[arg(long = "method", value_name = "METHOD")]
    methods: Vec<BeamformerMethod>,
    /// Override the output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig, ucmvdr_cli::Error> {
        let mut config = ExperimentConfig::from_file(&self.config)?;
        if let Some(trials) = self.trials {
            config.n_trials = trials;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(snapshots) = self.snapshots {
            config.n_snapshots = snapshots;
        }
        if !self.methods.is_empty() {
            config.methods = self.methods.clone();
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured Monte Carlo experiment and write all artifacts
    Run {
        #[command(flatten)]
        overrides: Overrides,
        /// Worker threads (default: one per core)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write the exemplar-trial beampattern CSVs without running a full experiment
    Beampattern {
        #[command(flatten)]
        overrides: Overrides,
        /// Exemplar trial index
        #[arg(long, default_value_t = output::EXEMPLAR_TRIAL)]
        trial: u64,
    },
    /// Write the exemplar-trial zero-location CSVs
    Zeros {
        #[command(flatten)]
        overrides: Overrides,
        /// Exemplar trial index
        #[arg(long, default_value_t = output::EXEMPLAR_TRIAL)]
        trial: u64,
    },
    /// Calibrate the diagonal loading factor and print it
    CalibrateDl {
        #[command(flatten)]
        overrides: Overrides,
        /// Pilot trials (default: from the config's dl_policy, else 1000)
        #[arg(long)]
        pilot_trials: Option<usize>,
        /// Target mean WNG (default: the pilot-set UC mean WNG)
        #[arg(long)]
        target_wng: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<(), ucmvdr_cli::Error> {
    match command {
        Command::Run { overrides, threads } => {
            let config = overrides.load()?;
            let summary = runner::run_experiment(&config, &RunOptions { threads })?;
            print_summary(&summary);
            println!("artifacts written to {}", config.output_dir.display());
            Ok(())
        }
        Command::Beampattern { overrides, trial } => {
            let config = overrides.load()?;
            let ctx = TrialContext::new(&config)?;
            output::prepare_output_dir(&config.output_dir)?;
            for path in output::write_exemplar_beampatterns(&ctx, trial, &config.output_dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Zeros { overrides, trial } => {
            let config = overrides.load()?;
            let ctx = TrialContext::new(&config)?;
            output::prepare_output_dir(&config.output_dir)?;
            for path in output::write_exemplar_zeros(&ctx, trial, &config.output_dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::CalibrateDl {
            overrides,
            pilot_trials,
            target_wng,
        } => {
            let mut config = overrides.load()?;
            let pilots = pilot_trials
                .or(match config.dl_policy {
                    Some(DlPolicy::MatchMeanWng { pilot_trials }) => Some(pilot_trials),
                    _ => None,
                })
                .unwrap_or(1000);
            // Route through the same pilot machinery the runner uses by
            // forcing the policy, then let the context resolve it.
            config.dl_policy = Some(DlPolicy::MatchMeanWng {
                pilot_trials: pilots,
            });
            if !config.methods.contains(&BeamformerMethod::Dl) {
                config.methods.push(BeamformerMethod::Dl);
            }
            let delta = match target_wng {
                Some(target) => ucmvdr::covariance::calibrate_dl_factor(
                    &config.ula,
                    &config.scene,
                    config.n_snapshots,
                    pilots,
                    target,
                    runner::pilot_seed(config.seed),
                )?,
                None => {
                    let ctx = TrialContext::new(&config)?;
                    if let Some(target) = ctx.pilot_uc_mean_wng() {
                        println!("pilot_uc_mean_wng = {}", output::format_float(target));
                    }
                    ctx.dl_factor().expect("dl policy forces a factor")
                }
            };
            println!("dl_factor = {}", output::format_float(delta));
            Ok(())
        }
    }
}

fn print_summary(summary: &runner::ExperimentSummary) {
    println!(
        "{} trials, L = {}, N = {}, seed {}",
        summary.n_trials, summary.n_snapshots, summary.n_sensors, summary.seed
    );
    println!(
        "ensemble reference: WNG {:.4}, interferer power {:.6e}, notch {:.2} dB",
        summary.ensemble.wng,
        summary.ensemble.interferer_output_power,
        summary.ensemble.notch_depth_db
    );
    if let Some(delta) = summary.dl_factor {
        match summary.pilot_uc_mean_wng {
            Some(target) => {
                println!("dl factor {delta:.6e} (calibrated to pilot UC mean WNG {target:.4})")
            }
            None => println!("dl factor {delta:.6e} (fixed)"),
        }
    }
    println!(
        "{:<6} {:>12} {:>16} {:>16} {:>8}",
        "method", "mean WNG", "mean int. power", "median int. power", "failed"
    );
    for (name, m) in &summary.methods {
        println!(
            "{:<6} {:>12.4} {:>16.6e} {:>16.6e} {:>8}",
            name,
            m.mean_wng,
            m.mean_interferer_output_power,
            m.median_interferer_output_power,
            m.n_failed
        );
    }
}
