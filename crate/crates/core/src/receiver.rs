//! Homodyne receiver: decide `+` when `x ≥ 0`, `-` otherwise.
//!
//! With equal priors and the symmetric pair `|±α, r⟩` the error probability is
//! `P(x ≥ 0 | -)`. Under phase diffusion the state is a Gaussian mixture of
//! rotated Gaussians, so the error is a one-dimensional phase average of
//! `½ erfc(2α cos φ / √(2 V(φ)))`.

use std::f64::consts::{FRAC_2_PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{budget_to_seed, rotated_quadrature_stats, ChannelBudget, SeedState, Sign};
use crate::quadrature::{PhaseQuadrature, PhaseRule};

/// Gaussian phase diffusion `φ ~ N(0, σ²)`; equivalently `Δ = Γt = σ²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoise {
    sigma: f64,
}

impl PhaseNoise {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { sigma })
    }

    pub fn none() -> Self {
        Self { sigma: 0.0 }
    }

    /// From the master-equation rate and time, `σ² = 2Γt`.
    pub fn from_diffusion(gamma: f64, t: f64) -> Result<Self> {
        Self::new((2.0 * gamma * t).sqrt())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }
}

pub(crate) fn half_erfc(z: f64) -> f64 {
    0.5 * libm::erfc(z)
}

/// Noiseless pure-seed homodyne error, `½ erfc(√2 α / Σ)` with
/// `α = √(N(1-β))` and `Σ = (√(Nβ) + √(1+Nβ))⁻¹`.
pub fn error_probability_pure(budget: &ChannelBudget) -> f64 {
    let n = budget.energy();
    let nsq = budget.squeezing_photons();
    let alpha = (n - nsq).max(0.0).sqrt();
    let inv_sigma = nsq.sqrt() + (1.0 + nsq).sqrt();
    half_erfc(SQRT_2 * alpha * inv_sigma)
}

/// Error for a fixed phase rotation `φ` of the wrong-sign state.
fn conditional_error(seed: &SeedState, phase: f64) -> f64 {
    let stats = rotated_quadrature_stats(seed, phase, Sign::Plus);
    half_erfc(stats.mean / (2.0 * stats.variance).sqrt())
}

/// Homodyne error probability with phase diffusion and an impure seed.
///
/// The phase average is adaptive (see [`PhaseQuadrature`]); at `σ = 0` and
/// `μ = 1` this is exactly [`error_probability_pure`].
pub fn error_probability(
    budget: &ChannelBudget,
    purity: f64,
    noise: &PhaseNoise,
    quad: &PhaseQuadrature,
) -> Result<f64> {
    if noise.sigma() == 0.0 && purity == 1.0 {
        return Ok(error_probability_pure(budget));
    }
    let seed = budget_to_seed(budget, purity)?;
    error_probability_seed(&seed, noise, quad)
}

/// [`error_probability`] for an explicit seed state.
pub fn error_probability_seed(seed: &SeedState, noise: &PhaseNoise, quad: &PhaseQuadrature) -> Result<f64> {
    resolve_error_probability(seed, noise, quad).map(|(p, _)| p)
}

/// Error probability together with the phase rule that converged.
pub fn resolve_error_probability(
    seed: &SeedState,
    noise: &PhaseNoise,
    quad: &PhaseQuadrature,
) -> Result<(f64, PhaseRule)> {
    quad.resolve(noise.sigma(), |phi| conditional_error(seed, phi))
}

/// Error probability at a fixed phase rule (no adaptivity).
pub fn error_probability_with_rule(seed: &SeedState, noise: &PhaseNoise, rule: &PhaseRule) -> f64 {
    rule.average(noise.sigma(), |phi| conditional_error(seed, phi))
}

/// Large-`N` expressions for the error probabilities and the squeezing advantage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymptoticKind {
    /// `¼ e^{-4N}`
    HelstromCs,
    /// `¼ e^{-4N(N+1)}`
    HelstromDss,
    /// `¼ √(2/π) e^{-2N} / √N`
    HomodyneCs,
    /// `¼ √(2/π) e^{-2N²} / N`
    HomodyneDss,
    /// `1 - e^{-4N²}`
    AdvantageRatio,
}

impl AsymptoticKind {
    pub const ALL: [AsymptoticKind; 5] = [
        AsymptoticKind::HelstromCs,
        AsymptoticKind::HelstromDss,
        AsymptoticKind::HomodyneCs,
        AsymptoticKind::HomodyneDss,
        AsymptoticKind::AdvantageRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AsymptoticKind::HelstromCs => "helstrom-cs",
            AsymptoticKind::HelstromDss => "helstrom-dss",
            AsymptoticKind::HomodyneCs => "homodyne-cs",
            AsymptoticKind::HomodyneDss => "homodyne-dss",
            AsymptoticKind::AdvantageRatio => "advantage-ratio",
        }
    }
}

impl fmt::Display for AsymptoticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AsymptoticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

pub fn asymptotic_error(kind: AsymptoticKind, energy: f64) -> Result<f64> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidParameter {
            name: "energy",
            value: energy,
            reason: "must be positive",
        });
    }
    let n = energy;
    let pref = 0.25 * FRAC_2_PI.sqrt();
    Ok(match kind {
        AsymptoticKind::HelstromCs => 0.25 * (-4.0 * n).exp(),
        AsymptoticKind::HelstromDss => 0.25 * (-4.0 * n * (n + 1.0)).exp(),
        AsymptoticKind::HomodyneCs => pref * (-2.0 * n).exp() / n.sqrt(),
        AsymptoticKind::HomodyneDss => pref * (-2.0 * n * n).exp() / n,
        AsymptoticKind::AdvantageRatio => -(-4.0 * n * n).exp_m1(),
    })
}
