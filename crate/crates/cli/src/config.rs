//! Command-line flags, the optional TOML config file, and their validated merge.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use sqzpsk_core::fock::CutoffPolicy;
use sqzpsk_core::quadrature::QuadratureRule;
use sqzpsk_core::{FigureId, Metric, PhaseQuadrature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Helstrom bound at one parameter point
    Helstrom,
    /// Homodyne error probability at one parameter point
    Homodyne,
    /// Largest squeezing fraction that still beats coherent states
    ThresholdBeta,
    /// Phase noise at which small squeezing stops helping homodyne detection
    ThresholdSigma,
    /// Small-squeezing slope function g(N; sigma)
    G,
    /// Figure dataset or explicit parameter grid
    Scan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Helstrom => "helstrom",
            Command::Homodyne => "homodyne",
            Command::ThresholdBeta => "threshold-beta",
            Command::ThresholdSigma => "threshold-sigma",
            Command::G => "g",
            Command::Scan => "scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "sqzpsk",
    version,
    about = "Binary PSK with displaced squeezed states",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// What to compute (may also come from the config file)
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Mean photon number per symbol
    #[arg(short = 'N', long)]
    pub energy: Option<f64>,
    /// Fraction of the energy spent on squeezing
    #[arg(long)]
    pub beta: Option<f64>,
    /// Phase-diffusion standard deviation
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Seed purity, 1 / (2 N_th + 1)
    #[arg(long)]
    pub purity: Option<f64>,
    /// Transmissivity of the loss after squeezing (with --r-tilde)
    #[arg(long)]
    pub eta: Option<f64>,
    /// Squeezing before loss (with --eta)
    #[arg(long)]
    pub r_tilde: Option<f64>,
    /// helstrom or homodyne
    #[arg(long)]
    pub metric: Option<Metric>,
    /// Figure dataset for `scan`
    #[arg(long)]
    pub figure: Option<FigureId>,
    /// Comma-separated energies for a grid scan
    #[arg(long, value_delimiter = ',')]
    pub energies: Option<Vec<f64>>,
    /// Comma-separated squeezing fractions for a grid scan
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    /// Comma-separated phase-noise levels for a grid scan
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    /// Comma-separated purities for a grid scan
    #[arg(long, value_delimiter = ',')]
    pub purities: Option<Vec<f64>>,
    /// Points per continuous figure axis
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Largest Fock-space mass allowed above the cutoff
    #[arg(long)]
    pub cutoff_tail: Option<f64>,
    /// Largest Gauss-Hermite rule (power of two, 16..=1024)
    #[arg(long)]
    pub quad_nodes: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// TOML file with the same settings; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    command: Option<Command>,
    #[serde(default)]
    parameters: FileParameters,
    #[serde(default)]
    numerics: FileNumerics,
    #[serde(default)]
    output: FileOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileParameters {
    energy: Option<f64>,
    beta: Option<f64>,
    sigma: Option<f64>,
    purity: Option<f64>,
    eta: Option<f64>,
    r_tilde: Option<f64>,
    metric: Option<Metric>,
    figure: Option<FigureId>,
    energies: Option<Vec<f64>>,
    betas: Option<Vec<f64>>,
    sigmas: Option<Vec<f64>>,
    purities: Option<Vec<f64>>,
    resolution: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileNumerics {
    cutoff_tail: Option<f64>,
    quad_nodes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileOutput {
    format: Option<Format>,
    path: Option<PathBuf>,
}

/// A rejected input, reported with the flag it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub flag: &'static str,
    pub message: String,
}

impl UsageError {
    pub fn new(flag: &'static str, message: impl Into<String>) -> Self {
        Self {
            flag,
            message: message.into(),
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.flag, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Parameters {
    pub energy: Option<f64>,
    pub beta: Option<f64>,
    pub sigma: Option<f64>,
    pub purity: Option<f64>,
    pub eta: Option<f64>,
    pub r_tilde: Option<f64>,
    pub metric: Option<Metric>,
    pub figure: Option<FigureId>,
    pub energies: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub sigmas: Option<Vec<f64>>,
    pub purities: Option<Vec<f64>>,
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub cutoff: CutoffPolicy,
    pub quadrature: PhaseQuadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub parameters: Parameters,
    pub numerics: Numerics,
    pub format: Format,
    pub output: Option<PathBuf>,
}

fn read_file(path: &Path) -> Result<FileConfig, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::new("--config", format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| UsageError::new("--config", format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Merges flags over the config file and checks everything that does not
    /// need the numerics.
    pub fn from_cli(cli: Cli) -> Result<Self, UsageError> {
        let file = match &cli.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let fp = file.parameters;
        let command = cli
            .command
            .or(file.command)
            .ok_or_else(|| UsageError::new("COMMAND", "no command given on the command line or in --config"))?;
        let parameters = Parameters {
            energy: cli.energy.or(fp.energy),
            beta: cli.beta.or(fp.beta),
            sigma: cli.sigma.or(fp.sigma),
            purity: cli.purity.or(fp.purity),
            eta: cli.eta.or(fp.eta),
            r_tilde: cli.r_tilde.or(fp.r_tilde),
            metric: cli.metric.or(fp.metric),
            figure: cli.figure.or(fp.figure),
            energies: cli.energies.or(fp.energies),
            betas: cli.betas.or(fp.betas),
            sigmas: cli.sigmas.or(fp.sigmas),
            purities: cli.purities.or(fp.purities),
            resolution: cli.resolution.or(fp.resolution),
        };

        let mut cutoff = CutoffPolicy::default();
        if let Some(tail) = cli.cutoff_tail.or(file.numerics.cutoff_tail) {
            cutoff = CutoffPolicy::with_target_tail(tail)
                .map_err(|_| UsageError::new("--cutoff-tail", format!("{tail} is not in (0, 1)")))?;
        }
        let mut quadrature = PhaseQuadrature::default();
        if let Some(nodes) = cli.quad_nodes.or(file.numerics.quad_nodes) {
            QuadratureRule::cached(nodes)
                .map_err(|_| UsageError::new("--quad-nodes", format!("{nodes} is not a power of two in [16, 1024]")))?;
            quadrature.max_nodes = nodes;
        }

        let format = cli.format.or(file.output.format).unwrap_or(match command {
            Command::Scan => Format::Csv,
            _ => Format::Text,
        });
        let config = Self {
            command,
            parameters,
            numerics: Numerics { cutoff, quadrature },
            format,
            output: cli.output.or(file.output.path),
        };
        config.check_exclusions()?;
        Ok(config)
    }

    fn check_exclusions(&self) -> Result<(), UsageError> {
        let p = &self.parameters;
        let lossy = p.eta.is_some() || p.r_tilde.is_some();
        if lossy {
            if p.purity.is_some() {
                return Err(UsageError::new("--purity", "cannot be combined with --eta/--r-tilde"));
            }
            if p.beta.is_some() {
                return Err(UsageError::new("--beta", "cannot be combined with --eta/--r-tilde"));
            }
            if p.eta.is_none() {
                return Err(UsageError::new("--eta", "required together with --r-tilde"));
            }
            if p.r_tilde.is_none() {
                return Err(UsageError::new("--r-tilde", "required together with --eta"));
            }
        }
        let grid = p.energies.is_some() || p.betas.is_some() || p.sigmas.is_some() || p.purities.is_some();
        if self.command == Command::Scan {
            if p.figure.is_some() && grid {
                return Err(UsageError::new("--figure", "cannot be combined with grid lists"));
            }
            if p.figure.is_none() && p.energies.is_none() {
                return Err(UsageError::new(
                    "--figure",
                    "scan needs --figure or at least --energies",
                ));
            }
        } else {
            if grid {
                return Err(UsageError::new("--energies", "grid lists are only valid for `scan`"));
            }
            if p.figure.is_some() {
                return Err(UsageError::new("--figure", "only valid for `scan`"));
            }
        }
        if self.command == Command::ThresholdBeta && p.beta.is_some() {
            return Err(UsageError::new("--beta", "is the unknown of `threshold-beta`"));
        }
        if self.command == Command::ThresholdSigma && (p.sigma.is_some() || p.beta.is_some()) {
            let flag = if p.sigma.is_some() { "--sigma" } else { "--beta" };
            return Err(UsageError::new(flag, "not used by `threshold-sigma`"));
        }
        Ok(())
    }
}
