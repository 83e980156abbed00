//! Executes a validated [`RunConfig`] and produces a table to emit.

use std::collections::BTreeMap;

use sqzpsk_core::analysis::{evaluate_metric, helstrom_noisy};
use sqzpsk_core::{
    beta_threshold_numeric, budget_to_seed, error_probability, g_function, loss_map, scan, sigma_threshold,
    AnalysisSettings, ChannelBudget, Error, GridSpec, LossyPreparation, Metric, PhaseNoise, ScanRequest, ScanSettings,
    ScanTable, ThresholdResult,
};

use crate::config::{Command, RunConfig, UsageError};

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    Usage(UsageError),
    Numerical(Error),
    Io(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

/// Output of a run: the table plus the single headline value for text output.
pub struct Outcome {
    pub table: ScanTable,
    pub headline: Option<f64>,
}

fn finite(flag: &'static str, v: f64) -> Result<f64, UsageError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(UsageError::new(flag, format!("{v} is not a finite number")))
    }
}

fn energy(cfg: &RunConfig) -> Result<f64, UsageError> {
    let n = cfg
        .parameters
        .energy
        .ok_or_else(|| UsageError::new("--energy", "required"))?;
    if finite("--energy", n)? <= 0.0 {
        return Err(UsageError::new("--energy", format!("{n} must be positive")));
    }
    Ok(n)
}

fn noise(flag: &'static str, sigma: f64) -> Result<PhaseNoise, UsageError> {
    PhaseNoise::new(sigma).map_err(|_| UsageError::new(flag, format!("{sigma} must be finite and non-negative")))
}

/// Squeezing fraction and purity, either given directly or derived from a
/// lossy squeezer (`--eta`, `--r-tilde`).
struct Seeding {
    beta: f64,
    purity: f64,
}

fn seeding(cfg: &RunConfig, n: f64) -> Result<Seeding, UsageError> {
    let p = &cfg.parameters;
    let (beta, purity) = match (p.eta, p.r_tilde) {
        (Some(eta), Some(rt)) => {
            let prep = LossyPreparation::new(finite("--r-tilde", rt)?, finite("--eta", eta)?).map_err(|e| match e {
                Error::InvalidTransmissivity(_) => UsageError::new("--eta", format!("{eta} is outside (0, 1]")),
                _ => UsageError::new("--r-tilde", format!("{rt} must be non-negative")),
            })?;
            let out = loss_map(&prep).map_err(|e| UsageError::new("--eta", e.to_string()))?;
            let beta = out.squeezing.sinh().powi(2) / n;
            if beta > 1.0 {
                return Err(UsageError::new(
                    "--r-tilde",
                    format!(
                        "squeezing after loss needs {:.6} photons, more than --energy {n}",
                        beta * n
                    ),
                ));
            }
            (beta, out.purity)
        }
        _ => (p.beta.unwrap_or(0.0), p.purity.unwrap_or(1.0)),
    };
    let beta = finite("--beta", beta)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(UsageError::new("--beta", format!("{beta} is outside [0, 1]")));
    }
    let lower = 1.0 / (1.0 + 2.0 * n);
    if !(purity <= 1.0 && (purity > lower || purity == 1.0)) {
        return Err(UsageError::new("--purity", format!("{purity} is outside ({lower}, 1]")));
    }
    Ok(Seeding { beta, purity })
}

fn feasible_budget(n: f64, s: &Seeding) -> Result<ChannelBudget, UsageError> {
    let budget = ChannelBudget::new(n, s.beta).map_err(|e| UsageError::new("--beta", e.to_string()))?;
    budget_to_seed(&budget, s.purity).map_err(|e| {
        let flag = if s.beta > 0.0 { "--beta" } else { "--purity" };
        UsageError::new(flag, e.to_string())
    })?;
    Ok(budget)
}

fn settings(cfg: &RunConfig) -> AnalysisSettings {
    AnalysisSettings {
        quadrature: cfg.numerics.quadrature,
        cutoff: cfg.numerics.cutoff,
        ..AnalysisSettings::default()
    }
}

fn single(name: &str, axes: Vec<(&str, f64)>, series: Vec<(&str, f64)>, meta: Vec<(&str, String)>) -> ScanTable {
    ScanTable {
        name: name.to_string(),
        axis_names: axes.iter().map(|(n, _)| n.to_string()).collect(),
        axis_grids: axes.iter().map(|&(_, v)| vec![v]).collect(),
        series_names: series.iter().map(|(n, _)| n.to_string()).collect(),
        values: series.iter().map(|&(_, v)| v).collect(),
        metadata: meta
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<BTreeMap<_, _>>(),
    }
}

fn threshold_series(value_name: &'static str, r: &ThresholdResult) -> Vec<(&'static str, f64)> {
    vec![
        (value_name, r.value),
        ("bracket_lo", r.bracket.0),
        ("bracket_hi", r.bracket.1),
        ("iterations", r.iterations as f64),
        ("residual", r.residual),
    ]
}

fn outcome_name(r: &ThresholdResult) -> String {
    serde_json::to_value(r.outcome)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let s = settings(cfg);
    let p = &cfg.parameters;
    let name = cfg.command.name();
    let table = match cfg.command {
        Command::Helstrom | Command::Homodyne => {
            let n = energy(cfg)?;
            let seed = seeding(cfg, n)?;
            let budget = feasible_budget(n, &seed)?;
            let sigma = p.sigma.unwrap_or(0.0);
            let pn = noise("--sigma", sigma)?;
            let mut meta = Vec::new();
            let (series, value) = if cfg.command == Command::Homodyne {
                (
                    "p_homodyne",
                    error_probability(&budget, seed.purity, &pn, &s.quadrature)?,
                )
            } else if sigma == 0.0 && seed.purity == 1.0 {
                ("p_helstrom", evaluate_metric(Metric::Helstrom, &budget, 1.0, &pn, &s)?)
            } else {
                let (v, trunc) = helstrom_noisy(&budget, seed.purity, &pn, &s.cutoff)?;
                meta.push(("fock_n_max", trunc.n_max.to_string()));
                meta.push(("fock_tail_mass", format!("{:e}", trunc.tail_mass)));
                ("p_helstrom", v)
            };
            single(
                name,
                vec![
                    ("energy", n),
                    ("beta", seed.beta),
                    ("sigma", sigma),
                    ("purity", seed.purity),
                ],
                vec![(series, value)],
                meta,
            )
        }
        Command::ThresholdBeta => {
            let n = energy(cfg)?;
            let seed = seeding(cfg, n)?;
            let sigma = p.sigma.unwrap_or(0.0);
            let pn = noise("--sigma", sigma)?;
            let metric = p.metric.unwrap_or(Metric::Homodyne);
            let r = beta_threshold_numeric(n, &pn, seed.purity, metric, &s)?;
            single(
                name,
                vec![("energy", n), ("sigma", sigma), ("purity", seed.purity)],
                threshold_series("beta_th", &r),
                vec![("metric", metric.to_string()), ("outcome", outcome_name(&r))],
            )
        }
        Command::ThresholdSigma => {
            let n = energy(cfg)?;
            let seed = seeding(cfg, n)?;
            let r = sigma_threshold(n, seed.purity, &s)?;
            single(
                name,
                vec![("energy", n), ("purity", seed.purity)],
                threshold_series("sigma_th", &r),
                vec![("metric", r.metric.to_string()), ("outcome", outcome_name(&r))],
            )
        }
        Command::G => {
            let n = energy(cfg)?;
            let sigma = p.sigma.unwrap_or(0.0);
            noise("--sigma", sigma)?;
            let v = g_function(n, sigma, &s.quadrature)?;
            single(name, vec![("energy", n), ("sigma", sigma)], vec![("g", v)], vec![])
        }
        Command::Scan => {
            let mut scan_settings = ScanSettings {
                analysis: s,
                ..ScanSettings::default()
            };
            if let Some(res) = p.resolution {
                if res < 2 {
                    return Err(UsageError::new("--resolution", format!("{res} must be at least 2")).into());
                }
                scan_settings.resolution = res;
            }
            let request = match p.figure {
                Some(id) => ScanRequest::Figure(id),
                None => ScanRequest::Grid(grid_spec(cfg)?),
            };
            scan(&request, &scan_settings)?
        }
    };
    let headline = match cfg.command {
        Command::Scan => None,
        _ => table.values.first().copied(),
    };
    Ok(Outcome { table, headline })
}

fn grid_spec(cfg: &RunConfig) -> Result<GridSpec, UsageError> {
    let p = &cfg.parameters;
    let list = |flag: &'static str, v: &Option<Vec<f64>>, default: f64| -> Result<Vec<f64>, UsageError> {
        let v = v.clone().unwrap_or_else(|| vec![default]);
        if v.is_empty() {
            return Err(UsageError::new(flag, "empty list"));
        }
        for &x in &v {
            finite(flag, x)?;
        }
        Ok(v)
    };
    let energies = list("--energies", &p.energies, 1.0)?;
    if let Some(&bad) = energies.iter().find(|&&n| n <= 0.0) {
        return Err(UsageError::new("--energies", format!("{bad} must be positive")));
    }
    let betas = list("--betas", &p.betas, 0.0)?;
    if let Some(&bad) = betas.iter().find(|b| !(0.0..=1.0).contains(*b)) {
        return Err(UsageError::new("--betas", format!("{bad} is outside [0, 1]")));
    }
    let sigmas = list("--sigmas", &p.sigmas, 0.0)?;
    if let Some(&bad) = sigmas.iter().find(|&&x| x < 0.0) {
        return Err(UsageError::new("--sigmas", format!("{bad} must be non-negative")));
    }
    let purities = list("--purities", &p.purities, 1.0)?;
    if let Some(&bad) = purities.iter().find(|m| !(**m > 0.0 && **m <= 1.0)) {
        return Err(UsageError::new("--purities", format!("{bad} is outside (0, 1]")));
    }
    Ok(GridSpec {
        metric: p.metric.unwrap_or(Metric::Homodyne),
        energies,
        betas,
        sigmas,
        purities,
    })
}
