//! TOML configuration and the merge of file values with command-line flags.
//!
//! Every top-level key mirrors a flag; flags win over the file.
//!
//! ```toml
//! prior = { kind = "beta", alpha = 1.0, beta = 10000.0 }
//! b = 1e-4
//! n = 10000
//! phi1 = 0.05
//! phi2 = 0.05
//! eps = 1e-10
//! seed = 7
//! out = "results.csv"
//!
//! [sweep]
//! axis = "n"
//! logspace = { from = 1e2, to = 1e7, points = 26 }
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cbi_core::{EngineOptions, PriorConfig, PriorSpec};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    N,
    Phi1,
    Phi2,
    Prior,
}

/// `count` log-spaced points from `from` to `to`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl LogRange {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.from > 0.0 && self.to > 0.0 && self.from.is_finite() && self.to.is_finite()) {
            return Err(CliError::Usage(format!(
                "log-spaced range needs positive finite ends, got {} to {}",
                self.from, self.to
            )));
        }
        if self.points == 0 {
            return Err(CliError::Usage(
                "log-spaced range needs at least one point".into(),
            ));
        }
        if self.points == 1 {
            return Ok(vec![self.from]);
        }
        let (lo, hi) = (self.from.log10(), self.to.log10());
        let step = (hi - lo) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| match i {
                0 => self.from,
                i if i + 1 == self.points => self.to,
                i => 10f64.powf(lo + i as f64 * step),
            })
            .collect())
    }
}

impl FromStr for LogRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected `FROM,TO,POINTS`, got `{s}`");
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [from, to, points] = parts[..] else {
            return Err(bad());
        };
        Ok(Self {
            from: from.parse().map_err(|_| bad())?,
            to: to.parse().map_err(|_| bad())?,
            points: points.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Option<Axis>,
    pub values: Option<Vec<f64>>,
    pub logspace: Option<LogRange>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdumpSection {
    pub points: Option<usize>,
    pub x_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub x: Option<f64>,
    pub lambda: Option<f64>,
    pub chains: Option<usize>,
    pub runs: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub runs: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub prior: Option<PriorConfig>,
    pub priors: Option<Vec<PriorConfig>>,
    pub b: Option<f64>,
    pub n: Option<u64>,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub gdump: GdumpSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file providing defaults for any flag
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Prior on the pfd as `beta:ALPHA,BETA` (repeat in sweeps)
    #[arg(long, value_name = "beta:A,B")]
    pub prior: Vec<PriorConfig>,
    /// Reliability bound on the pfd
    #[arg(long)]
    pub b: Option<f64>,
    /// Number of failure-free demands
    #[arg(long)]
    pub n: Option<u64>,
    /// Doubt mass on negative dependence, below b
    #[arg(long)]
    pub phi1: Option<f64>,
    /// Doubt mass on positive dependence, above b
    #[arg(long)]
    pub phi2: Option<f64>,
    /// Mass tolerance of the cut-point solver
    #[arg(long)]
    pub eps: Option<f64>,
    /// Seed for simulations
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write CSV here instead of standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub priors: Vec<PriorConfig>,
    pub b: Option<f64>,
    pub n: Option<u64>,
    pub phi1: f64,
    pub phi2: f64,
    pub eps: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub file: FileConfig,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let priors = if !args.prior.is_empty() {
            args.prior.clone()
        } else if let Some(list) = &file.priors {
            if file.prior.is_some() {
                return Err(CliError::Usage(
                    "config sets both `prior` and `priors`".into(),
                ));
            }
            list.clone()
        } else {
            file.prior.clone().into_iter().collect()
        };
        Ok(Self {
            priors,
            b: args.b.or(file.b),
            n: args.n.or(file.n),
            phi1: args.phi1.or(file.phi1).unwrap_or(0.0),
            phi2: args.phi2.or(file.phi2).unwrap_or(0.0),
            eps: args.eps.or(file.eps),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            out: args.out.clone().or_else(|| file.out.clone()),
            file,
        })
    }

    pub fn prior_specs(&self) -> Result<Vec<PriorSpec>, CliError> {
        if self.priors.is_empty() {
            return Err(CliError::Usage("missing --prior".into()));
        }
        self.priors
            .iter()
            .map(|p| PriorSpec::try_from(p.clone()).map_err(CliError::from))
            .collect()
    }

    pub fn single_prior(&self) -> Result<PriorSpec, CliError> {
        let mut specs = self.prior_specs()?;
        if specs.len() > 1 {
            return Err(CliError::Usage("expected exactly one --prior".into()));
        }
        Ok(specs.remove(0))
    }

    pub fn b(&self) -> Result<f64, CliError> {
        self.b.ok_or_else(|| CliError::Usage("missing --b".into()))
    }

    pub fn n(&self) -> Result<u64, CliError> {
        self.n.ok_or_else(|| CliError::Usage("missing --n".into()))
    }

    pub fn engine(&self) -> Result<EngineOptions, CliError> {
        let mut opts = EngineOptions::default();
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(CliError::Usage(format!(
                    "--eps must lie in (0, 1), got {eps}"
                )));
            }
            opts.solver.eps = eps;
        }
        Ok(opts)
    }
}
