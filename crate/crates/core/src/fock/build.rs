use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FockDensityMatrix;
use crate::error::{Error, Result};
use crate::gaussian::{SeedState, Sign};

/// How far the number basis is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffPolicy {
    /// Largest diagonal mass allowed above the cutoff.
    pub target_tail: f64,
    /// Largest dimension (`n_max + 1`) ever retained.
    pub hard_max: usize,
    /// Extra levels the generators are exponentiated in and then discarded.
    pub guard_band: usize,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self {
            target_tail: 1e-12,
            hard_max: 512,
            guard_band: 32,
        }
    }
}

impl CutoffPolicy {
    pub fn with_target_tail(target_tail: f64) -> Result<Self> {
        let policy = Self {
            target_tail,
            ..Self::default()
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_tail > 0.0 && self.target_tail < 1.0) {
            return Err(Error::InvalidParameter {
                name: "cutoff_tail",
                value: self.target_tail,
                reason: "must lie in (0, 1)",
            });
        }
        if self.hard_max < 2 {
            return Err(Error::InvalidParameter {
                name: "hard_max",
                value: self.hard_max as f64,
                reason: "must be at least 2",
            });
        }
        Ok(())
    }

    /// First `n_max` tried: mean photon number plus ten standard deviations.
    fn initial_n_max(&self, seed: &SeedState) -> usize {
        let guess = seed.mean_photons() + 10.0 * seed.photon_number_variance().sqrt() + 20.0;
        (guess.ceil() as usize).min(self.hard_max - 1)
    }
}

const UNITARITY_TOLERANCE: f64 = 1e-9;

/// `D(±α) S(r) ν(N_th) S†(r) D†(±α)` in a number basis truncated so that the
/// diagonal mass above `n_max` stays below `cutoff.target_tail`.
///
/// The cutoff starts from a moment-based guess and is doubled until the tail
/// criterion holds or `hard_max` is reached.
pub fn build_state(seed: &SeedState, sign: Sign, cutoff: &CutoffPolicy) -> Result<FockDensityMatrix> {
    cutoff.validate()?;
    let mut n_max = cutoff.initial_n_max(seed);
    loop {
        let rho = build_state_at(seed, sign, n_max, cutoff.guard_band)?;
        let tail = rho.tail_mass();
        if tail < cutoff.target_tail {
            return Ok(rho);
        }
        if n_max + 1 >= cutoff.hard_max {
            return Err(Error::CutoffExceeded {
                hard_max: cutoff.hard_max,
                target_tail: cutoff.target_tail,
                tail,
            });
        }
        n_max = (2 * n_max).min(cutoff.hard_max - 1);
    }
}

/// Both PSK symbols at a common cutoff.
pub fn build_pair(seed: &SeedState, cutoff: &CutoffPolicy) -> Result<(FockDensityMatrix, FockDensityMatrix)> {
    let plus = build_state(seed, Sign::Plus, cutoff)?;
    let minus = build_state_at(seed, Sign::Minus, plus.n_max(), cutoff.guard_band)?;
    Ok((plus, minus))
}

/// Builds the state at an explicit cutoff: `n_max + 1 + guard` levels are
/// exponentiated and the top-left `n_max + 1` block is kept.
pub fn build_state_at(seed: &SeedState, sign: Sign, n_max: usize, guard: usize) -> Result<FockDensityMatrix> {
    let work = n_max + 1 + guard;
    let unitary = signal_unitary(seed.alpha() * sign.factor(), seed.squeezing(), work);
    unitarity_guard(&unitary, work - guard)?;

    let weights = thermal_weights(seed.thermal_photons(), work);
    let keep = n_max + 1;
    // ρ = Σ_k p_k U|k⟩⟨k|U†, restricted to the kept block.
    let mut rho = DMatrix::<f64>::zeros(keep, keep);
    for (k, &p) in weights.iter().enumerate() {
        if p < 1e-300 {
            continue;
        }
        let col = unitary.column(k).rows(0, keep).into_owned();
        rho.ger(p, &col, &col, 1.0);
    }
    let entries = DMatrix::from_fn(keep, keep, |n, m| {
        // symmetrize so Hermiticity is exact
        Complex64::new(0.5 * (rho[(n, m)] + rho[(m, n)]), 0.0)
    });
    FockDensityMatrix::from_matrix(entries)
}

/// `D(α) S(r)` as a real orthogonal matrix of size `dim` (α and r real).
///
/// `D(α) = exp[α(a† - a)]`, `S(r) = exp[½r(a² - a†²)]`; the latter squeezes
/// the `x = a + a†` quadrature.
fn signal_unitary(alpha: f64, r: f64, dim: usize) -> DMatrix<f64> {
    let mut u = DMatrix::<f64>::identity(dim, dim);
    if r != 0.0 {
        let mut g = DMatrix::<f64>::zeros(dim, dim);
        for n in 0..dim.saturating_sub(2) {
            let v = 0.5 * r * (((n + 1) * (n + 2)) as f64).sqrt();
            g[(n, n + 2)] = v;
            g[(n + 2, n)] = -v;
        }
        u = g.exp();
    }
    if alpha != 0.0 {
        let mut g = DMatrix::<f64>::zeros(dim, dim);
        for n in 0..dim - 1 {
            let v = alpha * ((n + 1) as f64).sqrt();
            g[(n + 1, n)] = v;
            g[(n, n + 1)] = -v;
        }
        u = g.exp() * u;
    }
    u
}

fn unitarity_guard(u: &DMatrix<f64>, block: usize) -> Result<()> {
    let gram = u.transpose() * u;
    let mut deviation = 0.0f64;
    for i in 0..block {
        for j in 0..block {
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((gram[(i, j)] - target).abs());
        }
    }
    if deviation < UNITARITY_TOLERANCE {
        Ok(())
    } else {
        Err(Error::UnitarityGuardFailed { deviation })
    }
}

/// Bose–Einstein populations `N^k / (N+1)^{k+1}` for `k < dim`.
fn thermal_weights(nth: f64, dim: usize) -> Vec<f64> {
    let mut w = vec![0.0; dim];
    if nth == 0.0 {
        w[0] = 1.0;
        return w;
    }
    let ratio = nth / (nth + 1.0);
    let mut p = 1.0 / (nth + 1.0);
    for wk in w.iter_mut() {
        *wk = p;
        p *= ratio;
    }
    w
}
