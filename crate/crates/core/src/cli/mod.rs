//! Command-line front end: CSV ingestion, run manifests and the three
//! commands `fit-model1`, `fit-model2` and `simulate`.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | invalid input, flags or manifest; nothing is written |
//! | 3 | sampling or output failure |
//! | 4 | some R̂ exceeds [`RHAT_THRESHOLD`]; results are still written |

pub mod ingest;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{pooling_report, sensitivity_harness, summarize, Scenario};
use crate::models::{Heterogeneity, LogDensity, Model1, Model1Priors, Model2, Model2Priors};
use crate::sampler::{run, SamplerConfig};
use crate::{Error, Result};

pub use ingest::{
    ingest_households, ingest_site_predictors, ingest_sites, read_sites, write_sites, HouseholdMode,
};
pub use output::OutputFile;

pub const FORMAT_VERSION: u32 = 1;
pub const RHAT_THRESHOLD: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Invalid = 2,
    RunFailed = 3,
    NotConverged = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// An error paired with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub status: ExitStatus,
    pub error: Error,
}

impl Failure {
    fn invalid(error: Error) -> Self {
        Failure {
            status: ExitStatus::Invalid,
            error,
        }
    }

    fn run(error: Error) -> Self {
        Failure {
            status: ExitStatus::RunFailed,
            error,
        }
    }
}

/// The command and its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandSpec {
    FitModel1 {
        sites: PathBuf,
    },
    FitModel2 {
        households: PathBuf,
        site_predictors: PathBuf,
        bis: bool,
    },
    /// An empty scenario list selects the standard six-row set, equalizing on
    /// the first site of the file.
    Simulate {
        sites: PathBuf,
        scenarios: Vec<String>,
    },
}

/// Prior parameters that differ from the model defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PriorOverrides {
    pub tau_sd: Option<f64>,
    pub sigma_scale: Option<f64>,
    pub gamma_sd: Option<f64>,
    pub theta_scale: Option<f64>,
    pub lkj_eta: Option<f64>,
    pub sigma_upper: Option<f64>,
}

impl PriorOverrides {
    pub fn model1(&self) -> Model1Priors {
        let d = Model1Priors::default();
        let default_scale = match d.heterogeneity {
            Heterogeneity::HalfCauchy { scale } => scale,
            Heterogeneity::Known { .. } => unreachable!("default prior is half-Cauchy"),
        };
        Model1Priors {
            tau_sd: self.tau_sd.unwrap_or(d.tau_sd),
            heterogeneity: Heterogeneity::HalfCauchy {
                scale: self.sigma_scale.unwrap_or(default_scale),
            },
        }
    }

    pub fn model2(&self) -> Model2Priors {
        let d = Model2Priors::default();
        Model2Priors {
            gamma_sd: self.gamma_sd.unwrap_or(d.gamma_sd),
            theta_scale: self.theta_scale.unwrap_or(d.theta_scale),
            lkj_eta: self.lkj_eta.unwrap_or(d.lkj_eta),
            sigma_upper: self.sigma_upper.unwrap_or(d.sigma_upper),
        }
    }
}

/// Everything needed to reproduce a run. Written verbatim as
/// `manifest.json` into the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    #[serde(flatten)]
    pub command: CommandSpec,
    pub sampler: SamplerConfig,
    pub priors: PriorOverrides,
    pub output_dir: PathBuf,
}

impl RunManifest {
    pub fn new(command: CommandSpec, output_dir: impl Into<PathBuf>) -> Self {
        RunManifest {
            format_version: FORMAT_VERSION,
            command,
            sampler: SamplerConfig::default(),
            priors: PriorOverrides::default(),
            output_dir: output_dir.into(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
        let manifest: RunManifest = serde_json::from_str(&text)?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "manifest format version {} is not supported (expected {FORMAT_VERSION})",
                manifest.format_version
            )));
        }
        Ok(manifest)
    }
}

/// Runs the manifest and returns the files it would write, without writing.
pub fn render(
    manifest: &RunManifest,
) -> std::result::Result<(Vec<OutputFile>, ExitStatus), Failure> {
    manifest.sampler.validate().map_err(Failure::invalid)?;
    let (mut files, status) = match &manifest.command {
        CommandSpec::FitModel1 { sites } => {
            let data = ingest_sites(sites).map_err(Failure::invalid)?;
            let model =
                Model1::new(data.clone(), manifest.priors.model1()).map_err(Failure::invalid)?;
            fit_files(&model, &manifest.sampler, |fit| {
                Ok(vec![output::pooling_csv(&pooling_report(fit, &data)?)?])
            })?
        }
        CommandSpec::FitModel2 {
            households,
            site_predictors,
            bis,
        } => {
            let mode = if *bis {
                HouseholdMode::Model2Bis
            } else {
                HouseholdMode::Model2
            };
            let (records, design) =
                ingest_households(households, site_predictors, mode).map_err(Failure::invalid)?;
            let y = records.iter().map(|h| h.y).collect();
            let model =
                Model2::new(y, design, manifest.priors.model2()).map_err(Failure::invalid)?;
            fit_files(&model, &manifest.sampler, |_| Ok(Vec::new()))?
        }
        CommandSpec::Simulate { sites, scenarios } => {
            let data = ingest_sites(sites).map_err(Failure::invalid)?;
            let priors = manifest.priors.model1();
            Model1::new(data.clone(), priors).map_err(Failure::invalid)?;
            let scenarios = if scenarios.is_empty() {
                Scenario::default_set(&data[0].site_name)
            } else {
                scenarios
                    .iter()
                    .map(|s| s.parse::<Scenario>())
                    .collect::<Result<Vec<_>>>()
                    .map_err(Failure::invalid)?
            };
            for s in &scenarios {
                s.apply(&data).map_err(Failure::invalid)?;
            }
            let rows = sensitivity_harness(&data, &scenarios, &manifest.sampler, priors);
            let status = if rows.iter().any(|r| r.outcome.is_err()) {
                ExitStatus::RunFailed
            } else {
                ExitStatus::Success
            };
            (
                vec![output::sensitivity_csv(&rows).map_err(Failure::run)?],
                status,
            )
        }
    };
    files.push(manifest_file(manifest)?);
    Ok((files, status))
}

fn manifest_file(manifest: &RunManifest) -> std::result::Result<OutputFile, Failure> {
    let json = manifest.to_json().map_err(Failure::run)?;
    Ok(OutputFile {
        name: "manifest.json".into(),
        contents: json.into_bytes(),
    })
}

fn fit_files<M: LogDensity>(
    model: &M,
    config: &SamplerConfig,
    extra: impl FnOnce(&crate::ChainDraws) -> Result<Vec<OutputFile>>,
) -> std::result::Result<(Vec<OutputFile>, ExitStatus), Failure> {
    let fit = run(model, config).map_err(Failure::run)?;
    let summary = summarize(&fit);
    let mut files = vec![output::summary_csv(&summary).map_err(Failure::run)?];
    files.extend(extra(&fit).map_err(Failure::run)?);
    files.extend(output::density_files(&fit).map_err(Failure::run)?);
    files.push(output::diagnostics_txt(&fit, &summary));
    let status = if summary.max_rhat() > RHAT_THRESHOLD {
        ExitStatus::NotConverged
    } else {
        ExitStatus::Success
    };
    Ok((files, status))
}

/// Runs the manifest and writes its outputs into `manifest.output_dir`.
pub fn execute(manifest: &RunManifest) -> std::result::Result<ExitStatus, Failure> {
    let (files, status) = render(manifest)?;
    output::write_all(&manifest.output_dir, &files).map_err(Failure::run)?;
    Ok(status)
}

#[derive(Debug, Parser)]
#[command(
    name = "hbayes",
    version,
    about = "Hierarchical Bayesian partial pooling across sites"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Fit the site-summary model to a `site,tau_hat,sigma_hat` file.
    FitModel1 {
        sites: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        priors: Model1PriorArgs,
    },
    /// Fit the household-level model.
    FitModel2 {
        households: PathBuf,
        site_predictors: PathBuf,
        /// Add the baseline outcome as an individual-level predictor.
        #[arg(long)]
        bis: bool,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        priors: Model2PriorArgs,
    },
    /// Refit the site-summary model under rescaled inputs.
    Simulate {
        sites: PathBuf,
        /// Scenario such as `tau*10`, `sigma/10` or `equalize=SITE`. Repeat
        /// or separate with `;`. Defaults to the standard six scenarios.
        #[arg(long = "scenario", alias = "scenarios", value_delimiter = ';')]
        scenarios: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        priors: Model1PriorArgs,
    },
    /// Re-run a command from its `manifest.json`.
    Replay {
        manifest: PathBuf,
        /// Write to this directory instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Total iterations per chain, warmup included.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub target_accept: Option<f64>,
    #[arg(long)]
    pub max_leapfrog: Option<usize>,
    #[arg(long)]
    pub divergence_threshold: Option<f64>,
    #[arg(long)]
    pub no_adapt_metric: bool,
    #[arg(long)]
    pub step_jitter: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> SamplerConfig {
        let d = SamplerConfig::default();
        SamplerConfig {
            chains: self.chains.unwrap_or(d.chains),
            warmup: self.warmup.unwrap_or(d.warmup),
            iterations: self.iterations.unwrap_or(d.iterations),
            seed: self.seed,
            target_accept: self.target_accept.unwrap_or(d.target_accept),
            max_leapfrog: self.max_leapfrog.unwrap_or(d.max_leapfrog),
            divergence_threshold: self.divergence_threshold.unwrap_or(d.divergence_threshold),
            adapt_metric: !self.no_adapt_metric,
            step_jitter: self.step_jitter.unwrap_or(d.step_jitter),
        }
    }
}

#[derive(Debug, Args)]
pub struct Model1PriorArgs {
    /// Standard deviation of the normal prior on the mean effect.
    #[arg(long)]
    pub tau_sd: Option<f64>,
    /// Scale of the half-Cauchy prior on the between-site sd.
    #[arg(long)]
    pub sigma_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Model2PriorArgs {
    #[arg(long)]
    pub gamma_sd: Option<f64>,
    #[arg(long)]
    pub theta_scale: Option<f64>,
    #[arg(long)]
    pub lkj_eta: Option<f64>,
    /// Upper bound of the uniform prior on household-level sds.
    #[arg(long)]
    pub sigma_upper: Option<f64>,
}

impl Commands {
    /// The manifest for this invocation.
    pub fn manifest(self) -> Result<RunManifest> {
        let (command, run, priors) = match self {
            Commands::FitModel1 { sites, run, priors } => (
                CommandSpec::FitModel1 { sites },
                run,
                PriorOverrides {
                    tau_sd: priors.tau_sd,
                    sigma_scale: priors.sigma_scale,
                    ..PriorOverrides::default()
                },
            ),
            Commands::FitModel2 {
                households,
                site_predictors,
                bis,
                run,
                priors,
            } => (
                CommandSpec::FitModel2 {
                    households,
                    site_predictors,
                    bis,
                },
                run,
                PriorOverrides {
                    gamma_sd: priors.gamma_sd,
                    theta_scale: priors.theta_scale,
                    lkj_eta: priors.lkj_eta,
                    sigma_upper: priors.sigma_upper,
                    ..PriorOverrides::default()
                },
            ),
            Commands::Simulate {
                sites,
                scenarios,
                run,
                priors,
            } => (
                CommandSpec::Simulate { sites, scenarios },
                run,
                PriorOverrides {
                    tau_sd: priors.tau_sd,
                    sigma_scale: priors.sigma_scale,
                    ..PriorOverrides::default()
                },
            ),
            Commands::Replay { manifest, out } => {
                let mut m = RunManifest::load(&manifest)?;
                if let Some(out) = out {
                    m.output_dir = out;
                }
                return Ok(m);
            }
        };
        Ok(RunManifest {
            format_version: FORMAT_VERSION,
            command,
            sampler: run.config(),
            priors,
            output_dir: run.out,
        })
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Invalid.code()
            } else {
                0
            };
        }
    };
    let manifest = match cli.command.manifest() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::Invalid.code();
        }
    };
    match execute(&manifest) {
        Ok(status) => {
            if status == ExitStatus::NotConverged {
                eprintln!("warning: some R-hat exceeds {RHAT_THRESHOLD}; results written anyway");
            } else if status == ExitStatus::RunFailed {
                eprintln!("error: at least one run failed; see the output files");
            }
            status.code()
        }
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.status.code()
        }
    }
}
