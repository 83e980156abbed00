//! Signal-state parameterization for displaced squeezed (thermal) states.
//!
//! Quadratures follow `x_θ = a e^{-iθ} + a† e^{iθ}`, so the vacuum has unit
//! variance and `|α, r⟩` with real `α > 0` has `⟨x⟩ = 2α`. Squeezing reduces
//! the `x` variance to `e^{-2r}`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Which of the two PSK symbols `|±α, r⟩` was sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Total mean photon number `N` and the fraction `β` of it spent on squeezing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelBudget {
    energy: f64,
    squeezing_fraction: f64,
}

impl ChannelBudget {
    pub fn new(energy: f64, squeezing_fraction: f64) -> Result<Self> {
        ensure_finite("energy", energy)?;
        ensure_finite("beta", squeezing_fraction)?;
        if energy < 0.0 {
            return Err(Error::InvalidParameter {
                name: "energy",
                value: energy,
                reason: "must be non-negative",
            });
        }
        if !(0.0..=1.0).contains(&squeezing_fraction) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: squeezing_fraction,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Self {
            energy,
            squeezing_fraction,
        })
    }

    /// Coherent-state encoding (`β = 0`).
    pub fn coherent(energy: f64) -> Result<Self> {
        Self::new(energy, 0.0)
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn squeezing_fraction(&self) -> f64 {
        self.squeezing_fraction
    }

    /// Photons spent on squeezing, `N_sq = Nβ = sinh²r`.
    pub fn squeezing_photons(&self) -> f64 {
        self.energy * self.squeezing_fraction
    }

    /// Smallest purity for which a squeezed thermal seed can fit in this budget.
    pub fn min_purity(&self) -> f64 {
        1.0 / (1.0 + 2.0 * self.energy)
    }
}

/// Parameters of `D(α) S(r) ν(N_th) S†(r) D†(α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedState {
    alpha: f64,
    squeezing: f64,
    thermal_photons: f64,
}

impl SeedState {
    pub fn new(alpha: f64, squeezing: f64, thermal_photons: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha", alpha),
            ("squeezing", squeezing),
            ("thermal_photons", thermal_photons),
        ] {
            ensure_finite(name, v)?;
            if v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be non-negative",
                });
            }
        }
        Ok(Self {
            alpha,
            squeezing,
            thermal_photons,
        })
    }

    pub fn coherent(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, 0.0)
    }

    /// Squeezed thermal seed with the given purity `μ = 1/(2N_th + 1)`.
    pub fn with_purity(alpha: f64, squeezing: f64, purity: f64) -> Result<Self> {
        if !(purity > 0.0 && purity <= 1.0) {
            return Err(Error::InvalidPurity { purity, lower: 0.0 });
        }
        Self::new(alpha, squeezing, thermal_photons_for_purity(purity))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn squeezing(&self) -> f64 {
        self.squeezing
    }

    pub fn thermal_photons(&self) -> f64 {
        self.thermal_photons
    }

    pub fn purity(&self) -> f64 {
        1.0 / (2.0 * self.thermal_photons + 1.0)
    }

    pub fn is_pure(&self) -> bool {
        self.thermal_photons == 0.0
    }

    /// Mean photon number; identical to [`energy_of`].
    pub fn mean_photons(&self) -> f64 {
        energy_of(self)
    }

    /// Photon-number variance of the displaced squeezed thermal state.
    pub fn photon_number_variance(&self) -> f64 {
        let (sh, ch) = (self.squeezing.sinh(), self.squeezing.cosh());
        let scale = 2.0 * self.thermal_photons + 1.0;
        // Zero-mean moments: M = ⟨a†a⟩, A = ⟨a²⟩ (real, negative for x-squeezing).
        let m = scale * sh * sh + self.thermal_photons;
        let a = -scale * sh * ch;
        let alpha2 = self.alpha * self.alpha;
        m * (m + 1.0) + a * a + alpha2 * (2.0 * m + 1.0) + 2.0 * alpha2 * a
    }
}

pub fn thermal_photons_for_purity(purity: f64) -> f64 {
    (1.0 - purity) / (2.0 * purity)
}

/// Solves the fixed-energy constraint for the seed parameters.
///
/// `r = asinh(√(Nβ))`, `N_th = (1-μ)/(2μ)` and the displacement takes what is
/// left: `α² = N - Nβ - N_th(1 + 2Nβ)`.
pub fn budget_to_seed(budget: &ChannelBudget, purity: f64) -> Result<SeedState> {
    let lower = budget.min_purity();
    if !(purity.is_finite() && purity <= 1.0 && (purity > lower || purity == 1.0)) {
        return Err(Error::InvalidPurity { purity, lower });
    }
    let n = budget.energy();
    let nsq = budget.squeezing_photons();
    let nth = thermal_photons_for_purity(purity);
    let mut remaining = n - nsq - nth * (1.0 + 2.0 * nsq);
    if remaining < 0.0 {
        // Rounding at the edge of the feasible region (e.g. β = 1, μ = 1).
        if remaining > -1e-12 * n.max(1.0) {
            remaining = 0.0;
        } else {
            return Err(Error::EnergyBudgetExceeded { remaining });
        }
    }
    SeedState::new(remaining.sqrt(), nsq.sqrt().asinh(), nth)
}

/// Mean photon number `α² + (2N_th + 1) sinh²r + N_th`.
pub fn energy_of(seed: &SeedState) -> f64 {
    let sh = seed.squeezing.sinh();
    seed.alpha * seed.alpha + (2.0 * seed.thermal_photons + 1.0) * sh * sh + seed.thermal_photons
}

/// A pure squeezed vacuum `S(r̃)|0⟩` sent through a lossy channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossyPreparation {
    initial_squeezing: f64,
    transmissivity: f64,
}

impl LossyPreparation {
    pub fn new(initial_squeezing: f64, transmissivity: f64) -> Result<Self> {
        ensure_finite("r_tilde", initial_squeezing)?;
        if !(transmissivity > 0.0 && transmissivity <= 1.0) {
            return Err(Error::InvalidTransmissivity(transmissivity));
        }
        Ok(Self {
            initial_squeezing,
            transmissivity,
        })
    }

    pub fn initial_squeezing(&self) -> f64 {
        self.initial_squeezing
    }

    pub fn transmissivity(&self) -> f64 {
        self.transmissivity
    }

    /// Initial squeezing in dB, `10 log10(e^{2|r̃|})`.
    pub fn initial_squeezing_db(&self) -> f64 {
        10.0 * (2.0 * self.initial_squeezing.abs()).exp().log10()
    }
}

/// Squeezed thermal state equivalent to a lossy squeezed vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossOutcome {
    pub purity: f64,
    pub squeezing: f64,
}

/// Purity and effective squeezing after loss.
///
/// With `a = η + (1-η)e^{2r̃}` and `b = 1 + η(e^{2r̃} - 1)` the output quadrature
/// variances are `e^{-2r̃}a` and `b`, so `e^{2r} = e^{r̃}√(b/a)` and
/// `μ = Tr ρ² = e^{r̃}/√(ab)`.
pub fn loss_map(prep: &LossyPreparation) -> Result<LossOutcome> {
    let eta = prep.transmissivity;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidTransmissivity(eta));
    }
    let rt = prep.initial_squeezing;
    let e2 = (2.0 * rt).exp();
    let a = eta + (1.0 - eta) * e2;
    let b = 1.0 + eta * (e2 - 1.0);
    let purity = (e2 / (a * b)).sqrt();
    // ln(e^{2r}) = r̃ + ½ ln(b/a)
    let squeezing = 0.5 * (rt + 0.5 * (b / a).ln());
    Ok(LossOutcome { purity, squeezing })
}

/// Mean and variance of the `x` quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureStats {
    pub mean: f64,
    pub variance: f64,
}

/// `x`-quadrature moments of `U_φ ρ U_φ†` for the symbol `sign`.
///
/// `U_φ|±α, r⟩ = |±α e^{-iφ}, r e^{-2iφ}⟩`: the mean rotates as `cos φ` and the
/// squeezed ellipse as `2φ`.
pub fn rotated_quadrature_stats(seed: &SeedState, phase: f64, sign: Sign) -> QuadratureStats {
    let (s, c) = phase.sin_cos();
    let e2r = (2.0 * seed.squeezing).exp();
    QuadratureStats {
        mean: sign.factor() * 2.0 * seed.alpha * c,
        variance: (2.0 * seed.thermal_photons + 1.0) * (c * c / e2r + e2r * s * s),
    }
}
