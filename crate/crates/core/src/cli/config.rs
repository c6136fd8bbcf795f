use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::group::Bounds;
use crate::sampler::PrecisionPolicy;

/// What `compare` checks against theory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Cokernel types of single matrices against Cohen-Lenstra.
    CohenLenstra,
    /// Flag classes against the flag measure.
    #[default]
    Flag,
    /// Type of `cok(M1 M2)` given the factor types.
    Convolution,
    /// Corank of `M1 M2` given the factor coranks over `F_p`.
    Corank,
    /// Two entry distributions against each other.
    Cross,
    /// Mean surjection counts onto small target flags.
    Moment,
    /// Finite-n Haar law of `cok(M1 M2)` from Hall-Littlewood constants.
    Vp,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::CohenLenstra => "cohen-lenstra",
            Mode::Flag => "flag",
            Mode::Convolution => "convolution",
            Mode::Corank => "corank",
            Mode::Cross => "cross",
            Mode::Moment => "moment",
            Mode::Vp => "vp",
        }
    }
}

/// A fully resolved experiment. Together with the tool version it determines
/// every reported number; the fields marked `skip_serializing` only affect
/// where output goes and how fast it is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub primes: Vec<u64>,
    pub n: usize,
    pub k: usize,
    pub samples: u64,
    pub dist: String,
    /// Second distribution for cross comparisons.
    pub dist2: Option<String>,
    pub seed: u64,
    pub precision_start: u32,
    pub precision_max: u32,
    pub max_group_order: u64,
    pub max_aut_order: u64,
    pub max_homs: u64,
    /// Conditions, as `H|K` types for convolution and vp, `a|b` coranks for corank.
    pub given: Vec<String>,
    /// Observable compared in cross mode.
    pub cross_of: Mode,
    pub tv_threshold: f64,
    /// Largest allowed `|frequency - prediction|` on any listed cell.
    pub cell_tolerance: Option<f64>,
    /// Keys with smaller predicted mass are pooled into `other`.
    pub truncation: f64,
    /// Flag classes are listed for top groups up to this order.
    pub max_class_order: u64,
    /// Moment targets are all flags with top group up to this order.
    pub max_target_order: u64,
    pub moment_tolerance: f64,
    pub max_exclusion_rate: f64,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub emit_samples: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let b = Bounds::default();
        let pp = PrecisionPolicy::default();
        ExperimentConfig {
            mode: Mode::Flag,
            primes: vec![2],
            n: 60,
            k: 2,
            samples: 1000,
            dist: "uniform:0..7".into(),
            dist2: None,
            seed: 0,
            precision_start: pp.start,
            precision_max: pp.max,
            max_group_order: b.max_group_order,
            max_aut_order: b.max_aut_order,
            max_homs: b.max_homs,
            given: Vec::new(),
            cross_of: Mode::Flag,
            tv_threshold: 0.02,
            cell_tolerance: None,
            truncation: 1e-4,
            max_class_order: 16,
            max_target_order: 4,
            moment_tolerance: 0.05,
            max_exclusion_rate: 1e-3,
            threads: None,
            output: None,
            emit_samples: None,
        }
    }
}

impl ExperimentConfig {
    pub fn bounds(&self) -> Bounds {
        Bounds {
            max_group_order: self.max_group_order,
            max_aut_order: self.max_aut_order,
            max_homs: self.max_homs,
        }
    }

    pub fn policy(&self) -> PrecisionPolicy {
        PrecisionPolicy {
            start: self.precision_start,
            max: self.precision_max,
        }
    }

    /// The single prime of a one-prime experiment.
    pub fn prime(&self) -> Result<u64, CliError> {
        match self.primes.as_slice() {
            [p] => Ok(*p),
            _ => Err(CliError::Config(format!(
                "mode {} needs exactly one prime, got {:?}",
                self.mode.name(),
                self.primes
            ))),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Experiment flags; each one overrides the config file.
#[derive(Args, Debug, Default, Clone)]
pub struct ExperimentArgs {
    /// TOML file with any of the experiment fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Comma-separated primes.
    #[arg(long = "p", value_delimiter = ',')]
    pub primes: Option<Vec<u64>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Entry distribution: uniform:LO..HI, const:V, bernoulli:Q, finite:V=W,..., haar:P^N.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub dist2: Option<String>,
    /// Defaults to the COKFLAG_SEED environment variable, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub precision_start: Option<u32>,
    #[arg(long)]
    pub precision_max: Option<u32>,
    #[arg(long)]
    pub max_group_order: Option<u64>,
    #[arg(long)]
    pub max_aut_order: Option<u64>,
    #[arg(long)]
    pub max_homs: Option<u64>,
    /// Condition such as `1|1`; repeatable.
    #[arg(long)]
    pub given: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub cross_of: Option<Mode>,
    #[arg(long)]
    pub tv_threshold: Option<f64>,
    #[arg(long)]
    pub cell_tolerance: Option<f64>,
    #[arg(long)]
    pub truncation: Option<f64>,
    #[arg(long)]
    pub max_class_order: Option<u64>,
    #[arg(long)]
    pub max_target_order: Option<u64>,
    #[arg(long)]
    pub moment_tolerance: Option<f64>,
    #[arg(long)]
    pub max_exclusion_rate: Option<f64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write one JSON line per sample here (simulate only).
    #[arg(long)]
    pub emit_samples: Option<PathBuf>,
}

macro_rules! overlay {
    ($cfg:ident, $args:ident; $($field:ident),*) => {
        $(if let Some(v) = $args.$field.clone() { $cfg.$field = v; })*
    };
}

impl ExperimentArgs {
    /// File, then flags; the seed falls back to `COKFLAG_SEED` when neither
    /// sets it.
    pub fn resolve(&self, threads: Option<usize>) -> Result<ExperimentConfig, CliError> {
        let file_text = self.config.as_ref().map(std::fs::read_to_string).transpose();
        let file_text = file_text.map_err(|e| CliError::Config(format!("config: {e}")))?;
        let mut cfg = match &file_text {
            Some(text) => toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?,
            None => ExperimentConfig::default(),
        };
        let file_sets_seed = file_text
            .as_deref()
            .and_then(|t| t.parse::<toml::Table>().ok())
            .is_some_and(|t| t.contains_key("seed"));
        if self.seed.is_none() && !file_sets_seed {
            if let Ok(s) = std::env::var("COKFLAG_SEED") {
                cfg.seed = s
                    .trim()
                    .parse()
                    .map_err(|e| CliError::Config(format!("COKFLAG_SEED={s:?}: {e}")))?;
            }
        }
        overlay!(cfg, self; mode, primes, n, k, samples, dist, seed, precision_start, precision_max,
            max_group_order, max_aut_order, max_homs, given, cross_of, tv_threshold, truncation,
            max_class_order, max_target_order, moment_tolerance, max_exclusion_rate);
        if self.dist2.is_some() {
            cfg.dist2 = self.dist2.clone();
        }
        if self.cell_tolerance.is_some() {
            cfg.cell_tolerance = self.cell_tolerance;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        if self.emit_samples.is_some() {
            cfg.emit_samples = self.emit_samples.clone();
        }
        if threads.is_some() {
            cfg.threads = threads;
        }
        if cfg.primes.is_empty() {
            return Err(CliError::Config("at least one prime is required".into()));
        }
        Ok(cfg)
    }
}
