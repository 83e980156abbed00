//! Helstrom closed forms, squeezing thresholds and figure scans.

mod scan;
mod threshold;

pub use scan::{scan, FigureId, GridSpec, ScanRequest, ScanSettings, ScanTable};
pub use threshold::{
    beta_threshold_numeric, g_function, sigma_threshold, sigma_threshold_via, small_beta_slope, SigmaRoute, SlopeProbe,
    ThresholdOutcome, ThresholdResult,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{build_pair, helstrom_mixed, CutoffPolicy, TruncationInfo};
use crate::gaussian::{budget_to_seed, ChannelBudget};
use crate::quadrature::PhaseQuadrature;
use crate::receiver::{error_probability, PhaseNoise};

/// `½(1 - √(1 - x))` without cancellation for small `x`.
pub(crate) fn half_one_minus_sqrt(x: f64) -> f64 {
    0.5 * x / (1.0 + (1.0 - x).sqrt())
}

/// Pure-state Helstrom bound for `|±α, r⟩` at fixed energy.
///
/// The squared overlap is `exp[-4N(1-β)(1 + 2Nβ + 2√(Nβ(1+Nβ)))]`; the bracket
/// equals `e^{2r}`, so this is `exp(-4α² e^{2r})`.
pub fn helstrom_pure(budget: &ChannelBudget) -> f64 {
    half_one_minus_sqrt(pure_overlap_squared(budget))
}

pub fn pure_overlap_squared(budget: &ChannelBudget) -> f64 {
    let n = budget.energy();
    let b = budget.squeezing_fraction();
    let nsq = n * b;
    (-4.0 * n * (1.0 - b) * (1.0 + 2.0 * nsq + 2.0 * (nsq * (1.0 + nsq)).sqrt())).exp()
}

/// Same bound written in the seed parameters, `½(1 - √(1 - e^{-4α²e^{2r}}))`.
pub fn helstrom_pure_seed(alpha: f64, squeezing: f64) -> f64 {
    half_one_minus_sqrt((-4.0 * alpha * alpha * (2.0 * squeezing).exp()).exp())
}

/// Noiseless squeezing threshold and optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaClosedForms {
    /// `4N / (4N + 1)`
    pub threshold: f64,
    /// `N / (2N + 1)`
    pub optimum: f64,
}

pub fn beta_closed_forms(energy: f64) -> Result<BetaClosedForms> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidParameter {
            name: "energy",
            value: energy,
            reason: "must be positive",
        });
    }
    Ok(BetaClosedForms {
        threshold: 4.0 * energy / (4.0 * energy + 1.0),
        optimum: energy / (2.0 * energy + 1.0),
    })
}

/// Figure of merit used by threshold searches and scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Helstrom,
    Homodyne,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Helstrom => "helstrom",
            Metric::Homodyne => "homodyne",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "helstrom" => Ok(Metric::Helstrom),
            "homodyne" => Ok(Metric::Homodyne),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// Numerical knobs shared by the analysis routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub quadrature: PhaseQuadrature,
    pub cutoff: CutoffPolicy,
    /// Absolute tolerance on the independent variable of root searches.
    pub root_tolerance: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            quadrature: PhaseQuadrature::default(),
            cutoff: CutoffPolicy::default(),
            root_tolerance: 1e-9,
        }
    }
}

/// Helstrom bound for the (possibly noisy, possibly impure) PSK pair, from the
/// Fock oracle. Returns the bound and the truncation that produced it.
pub fn helstrom_noisy(
    budget: &ChannelBudget,
    purity: f64,
    noise: &PhaseNoise,
    cutoff: &CutoffPolicy,
) -> Result<(f64, TruncationInfo)> {
    let seed = budget_to_seed(budget, purity)?;
    let (plus, minus) = build_pair(&seed, cutoff)?;
    let sigma = noise.sigma();
    let (plus, minus) = (plus.dephased(sigma), minus.dephased(sigma));
    Ok((helstrom_mixed(&plus, &minus)?, plus.truncation()))
}

/// Evaluates `metric` for one parameter point. The Helstrom bound uses the
/// closed form when it applies (`σ = 0`, `μ = 1`) and the Fock oracle otherwise.
pub fn evaluate_metric(
    metric: Metric,
    budget: &ChannelBudget,
    purity: f64,
    noise: &PhaseNoise,
    settings: &AnalysisSettings,
) -> Result<f64> {
    match metric {
        Metric::Homodyne => error_probability(budget, purity, noise, &settings.quadrature),
        Metric::Helstrom if noise.sigma() == 0.0 && purity == 1.0 => Ok(helstrom_pure(budget)),
        Metric::Helstrom => helstrom_noisy(budget, purity, noise, &settings.cutoff).map(|(p, _)| p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn budget(n: f64, b: f64) -> ChannelBudget {
        ChannelBudget::new(n, b).unwrap()
    }

    #[test]
    fn helstrom_examples() {
        let p = helstrom_pure(&budget(1.0, 0.0));
        assert_abs_diff_eq!(p, 0.5 * (1.0 - (1.0 - (-4.0f64).exp()).sqrt()), epsilon = 1e-17);
        assert_abs_diff_eq!(p, 4.60007037e-3, epsilon = 1e-11);
        // exponent is exactly -8
        let p = helstrom_pure(&budget(1.0, 1.0 / 3.0));
        assert_abs_diff_eq!(p, 0.5 * (1.0 - (1.0 - (-8.0f64).exp()).sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(p, 8.3873e-5, epsilon = 1e-9);
        // exponent identity at β_th(1) = 0.8
        assert_abs_diff_eq!(
            helstrom_pure(&budget(1.0, 0.8)),
            helstrom_pure(&budget(1.0, 0.0)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn seed_form_agrees() {
        for (n, b) in [(1.0, 0.2), (2.0, 0.4), (0.5, 0.9)] {
            let seed = budget_to_seed(&budget(n, b), 1.0).unwrap();
            assert_abs_diff_eq!(
                helstrom_pure(&budget(n, b)),
                helstrom_pure_seed(seed.alpha(), seed.squeezing()),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn closed_forms() {
        let c = beta_closed_forms(1.0).unwrap();
        assert_eq!((c.threshold, c.optimum), (0.8, 1.0 / 3.0));
        let c = beta_closed_forms(2.0).unwrap();
        assert_abs_diff_eq!(c.threshold, 8.0 / 9.0, epsilon = 1e-16);
        assert_abs_diff_eq!(c.optimum, 0.4, epsilon = 1e-16);
        let c = beta_closed_forms(1e6).unwrap();
        assert_abs_diff_eq!(c.threshold, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(c.optimum, 0.5, epsilon = 1e-6);
        assert!(beta_closed_forms(0.0).is_err());
    }

    #[test]
    fn threshold_identity_and_optimum() {
        for n in [0.25, 0.5, 1.0, 2.0, 5.0] {
            let c = beta_closed_forms(n).unwrap();
            assert_abs_diff_eq!(
                helstrom_pure(&budget(n, c.threshold)),
                helstrom_pure(&budget(n, 0.0)),
                epsilon = 1e-12
            );
            // stationary at β_opt
            let h = 1e-5;
            let d = (helstrom_pure(&budget(n, c.optimum + h)) - helstrom_pure(&budget(n, c.optimum - h))) / (2.0 * h);
            assert!(d.abs() < 1e-8, "N={n}: derivative {d}");
        }
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("homodyne".parse::<Metric>().unwrap(), Metric::Homodyne);
        assert!("kennedy".parse::<Metric>().is_err());
        assert_eq!(Metric::Helstrom.to_string(), "helstrom");
    }
}
