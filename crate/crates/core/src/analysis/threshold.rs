use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_metric, AnalysisSettings, Metric};
use crate::error::{Error, Result};
use crate::gaussian::{budget_to_seed, thermal_photons_for_purity, ChannelBudget};
use crate::quadrature::PhaseQuadrature;
use crate::receiver::{error_probability_with_rule, resolve_error_probability, PhaseNoise};

/// How a threshold search ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdOutcome {
    /// A sign change was bracketed and refined.
    Crossing,
    /// Squeezing never helps; `value` is 0.
    NoAdvantage,
    /// The advantage persists over the whole search range; `value` is `+∞`.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub metric: Metric,
    pub outcome: ThresholdOutcome,
    /// Defining function evaluated at `value` (zero at an exact root).
    pub residual: f64,
}

/// Bisects `f` on `[lo, hi]` given `f(lo) < 0 ≤ f(hi)` or the reverse.
fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tolerance: f64) -> Result<(f64, (f64, f64), usize, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let lo_negative = f(lo)? < 0.0;
    let mut iterations = 0;
    while hi - lo > tolerance && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid)? < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let value = 0.5 * (lo + hi);
    Ok((value, (lo, hi), iterations, f(value)?))
}

/// Largest `β` at which the squeezed seed still beats the coherent one, i.e.
/// the largest root of `P(β) - P(0)` on `(0, β_max]`.
///
/// `β_max` is where the displacement energy runs out. The coarse grid is
/// geometric near zero (where the advantage may be tiny) and then uniform
/// with 64 points; when several crossings exist the largest is refined.
pub fn beta_threshold_numeric(
    energy: f64,
    noise: &PhaseNoise,
    purity: f64,
    metric: Metric,
    settings: &AnalysisSettings,
) -> Result<ThresholdResult> {
    let reference = ChannelBudget::coherent(energy)?;
    let beta_max = feasible_beta_max(energy, purity)?;
    let p0 = evaluate_metric(metric, &reference, purity, noise, settings)?;
    let delta = |beta: f64| -> Result<f64> {
        let budget = ChannelBudget::new(energy, beta.min(beta_max))?;
        Ok(evaluate_metric(metric, &budget, purity, noise, settings)? - p0)
    };

    let mut grid: Vec<f64> = (2..=9).rev().map(|k| beta_max * 10f64.powi(-k)).collect();
    grid.extend((1..=64).map(|i| beta_max * i as f64 / 64.0));
    let values = grid.par_iter().map(|&b| delta(b)).collect::<Result<Vec<f64>>>()?;

    let Some(last) = values.iter().rposition(|&v| v < 0.0) else {
        return Ok(ThresholdResult {
            value: 0.0,
            bracket: (0.0, grid[0]),
            iterations: 0,
            metric,
            outcome: ThresholdOutcome::NoAdvantage,
            residual: values[0],
        });
    };
    if last + 1 == grid.len() {
        return Err(Error::BracketingFailed(format!(
            "squeezing still helps at the largest feasible beta {beta_max}"
        )));
    }
    let (value, bracket, iterations, residual) = bisect(delta, grid[last], grid[last + 1], settings.root_tolerance)?;
    Ok(ThresholdResult {
        value,
        bracket,
        iterations,
        metric,
        outcome: ThresholdOutcome::Crossing,
        residual,
    })
}

/// Largest squeezing fraction compatible with the purity, where `α = 0`.
fn feasible_beta_max(energy: f64, purity: f64) -> Result<f64> {
    let budget = ChannelBudget::coherent(energy)?;
    budget_to_seed(&budget, purity)?;
    let nth = thermal_photons_for_purity(purity);
    Ok(((energy - nth) / (energy * (1.0 + 2.0 * nth))).min(1.0))
}

/// `g(N; σ) = E_φ[e^{-2N cos²φ} cos 2φ cos φ] / √π`.
///
/// To first order in `√(Nβ)` the homodyne error at `σ` is
/// `P_CS - √(2N) g(N; σ) √(Nβ)`, so squeezing helps exactly when `g > 0`.
pub fn g_function(energy: f64, sigma: f64, quad: &PhaseQuadrature) -> Result<f64> {
    if !(energy.is_finite() && energy >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "energy",
            value: energy,
            reason: "must be finite and non-negative",
        });
    }
    let avg = quad.average(sigma, |phi| {
        let c = phi.cos();
        (-2.0 * energy * c * c).exp() * (2.0 * phi).cos() * c
    })?;
    Ok(avg / PI.sqrt())
}

/// Where the small-`β` slope is probed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeProbe {
    /// Squeezing fraction at the centre of the difference.
    pub beta: f64,
    /// Step in `√β`.
    pub step: f64,
    /// Combine the slopes at `√β`, `2√β` and `4√β` to cancel the `O(√β)` and
    /// `O(β)` terms.
    pub extrapolate: bool,
}

impl Default for SlopeProbe {
    fn default() -> Self {
        Self {
            beta: 1e-6,
            step: 1e-7,
            extrapolate: true,
        }
    }
}

/// `dP/d√β` of the homodyne error near `β = 0`, by a central difference in
/// `√β`. Both evaluations of one difference share the phase rule resolved at
/// its centre.
pub fn small_beta_slope(
    energy: f64,
    purity: f64,
    noise: &PhaseNoise,
    quad: &PhaseQuadrature,
    probe: &SlopeProbe,
) -> Result<f64> {
    let u0 = probe.beta.sqrt();
    let at = |u: f64| -> Result<f64> {
        let centre = budget_to_seed(&ChannelBudget::new(energy, u * u)?, purity)?;
        let (_, rule) = resolve_error_probability(&centre, noise, quad)?;
        let p = |v: f64| -> Result<f64> {
            let seed = budget_to_seed(&ChannelBudget::new(energy, v * v)?, purity)?;
            Ok(error_probability_with_rule(&seed, noise, &rule))
        };
        Ok((p(u + probe.step)? - p(u - probe.step)?) / (2.0 * probe.step))
    };
    let near = at(u0)?;
    if probe.extrapolate {
        let (mid, far) = (at(2.0 * u0)?, at(4.0 * u0)?);
        Ok((8.0 * near - 6.0 * mid + far) / 3.0)
    } else {
        Ok(near)
    }
}

/// How the sign of the small-`β` advantage is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaRoute {
    /// Sign of `g(N; σ)`; pure seeds only.
    GFunction,
    /// Sign of `-dP/d√β` from [`small_beta_slope`].
    SmallBetaSlope,
}

const SIGMA_SCAN_MAX: f64 = 5.0;
const SIGMA_SCAN_STEP: f64 = 0.05;

/// Phase-noise level at which infinitesimal squeezing stops helping homodyne
/// detection. Pure seeds use the `g` route, impure ones the slope route.
pub fn sigma_threshold(energy: f64, purity: f64, settings: &AnalysisSettings) -> Result<ThresholdResult> {
    let route = if purity == 1.0 {
        SigmaRoute::GFunction
    } else {
        SigmaRoute::SmallBetaSlope
    };
    sigma_threshold_via(energy, purity, route, settings)
}

/// [`sigma_threshold`] with an explicit route. The search scans `(0, 5]` in
/// steps of 0.05 for the first loss of advantage and bisects inside that step.
pub fn sigma_threshold_via(
    energy: f64,
    purity: f64,
    route: SigmaRoute,
    settings: &AnalysisSettings,
) -> Result<ThresholdResult> {
    if route == SigmaRoute::GFunction && purity != 1.0 {
        return Err(Error::InvalidPurity { purity, lower: 1.0 });
    }
    feasible_beta_max(energy, purity)?;
    let probe = SlopeProbe::default();
    // positive while squeezing helps
    let advantage = |sigma: f64| -> Result<f64> {
        match route {
            SigmaRoute::GFunction => g_function(energy, sigma, &settings.quadrature),
            SigmaRoute::SmallBetaSlope => {
                let noise = PhaseNoise::new(sigma)?;
                Ok(-small_beta_slope(energy, purity, &noise, &settings.quadrature, &probe)?)
            }
        }
    };

    let steps = (SIGMA_SCAN_MAX / SIGMA_SCAN_STEP).round() as usize;
    let grid: Vec<f64> = (1..=steps).map(|k| k as f64 * SIGMA_SCAN_STEP).collect();
    let values = grid.par_iter().map(|&s| advantage(s)).collect::<Result<Vec<f64>>>()?;

    let metric = Metric::Homodyne;
    let Some(first) = values.iter().position(|&v| v <= 0.0) else {
        return Ok(ThresholdResult {
            value: f64::INFINITY,
            bracket: (SIGMA_SCAN_MAX, f64::INFINITY),
            iterations: 0,
            metric,
            outcome: ThresholdOutcome::Unbounded,
            residual: values[steps - 1],
        });
    };
    if first == 0 && advantage(0.0)? <= 0.0 {
        return Ok(ThresholdResult {
            value: 0.0,
            bracket: (0.0, grid[0]),
            iterations: 0,
            metric,
            outcome: ThresholdOutcome::NoAdvantage,
            residual: values[0],
        });
    }
    let lo = if first == 0 { 0.0 } else { grid[first - 1] };
    let (value, bracket, iterations, residual) = bisect(advantage, lo, grid[first], settings.root_tolerance)?;
    Ok(ThresholdResult {
        value,
        bracket,
        iterations,
        metric,
        outcome: ThresholdOutcome::Crossing,
        residual,
    })
}
