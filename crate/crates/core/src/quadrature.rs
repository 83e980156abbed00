//! Gaussian phase averages.
//!
//! Phase diffusion mixes `U_φ ρ U_φ†` over `φ ~ N(0, σ²)`. Averages over that
//! law use Gauss–Hermite rules (probabilists' weight, nodes built with
//! Golub–Welsch) with node doubling until two successive estimates agree.
//! When the Gaussian is so wide that 1024 nodes cannot resolve the integrand,
//! 2π-periodic integrands are averaged against the wrapped normal with the
//! periodic trapezoid rule instead; the two are the same integral.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigen_first_row;

pub const MIN_NODES: usize = 16;
pub const MAX_NODES: usize = 1024;

const MAX_WRAPPED_POINTS: usize = 16384;

/// Gauss–Hermite rule for expectations over a standard normal variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the `n`-node rule; `n` must be a power of two in `[16, 1024]`.
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        validate_size(n)?;
        // Jacobi matrix of the He_k recurrence: zero diagonal, √k off the diagonal.
        let diag = vec![0.0; n];
        let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
        let (mut nodes, first) = tridiagonal_eigen_first_row(&diag, &off)?;
        let mut weights: Vec<f64> = first.iter().map(|z| z * z).collect();

        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { nodes, weights })
    }

    /// Shared, lazily built rule of size `n`.
    pub fn cached(n: usize) -> Result<&'static Self> {
        static CACHE: [OnceLock<Result<QuadratureRule>>; 7] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        validate_size(n)?;
        let slot = (n.trailing_zeros() - MIN_NODES.trailing_zeros()) as usize;
        CACHE[slot]
            .get_or_init(|| Self::gauss_hermite(n))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(Z)]` for `Z ~ N(0, 1)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }
}

fn validate_size(n: usize) -> Result<()> {
    if n.is_power_of_two() && (MIN_NODES..=MAX_NODES).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "quad_nodes",
            value: n as f64,
            reason: "must be a power of two in [16, 1024]",
        })
    }
}

/// Adaptive settings for Gaussian phase averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseQuadrature {
    /// Absolute agreement required between successive estimates.
    pub tolerance: f64,
    /// Largest Gauss–Hermite rule tried before the wrapped fallback.
    pub max_nodes: usize,
}

impl Default for PhaseQuadrature {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_nodes: MAX_NODES,
        }
    }
}

/// A concrete rule picked by [`PhaseQuadrature::resolve`], reusable at fixed
/// resolution (finite differences need the same rule at every point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseRule {
    /// `σ = 0`: no averaging.
    PointMass,
    GaussHermite(&'static QuadratureRule),
    /// Periodic trapezoid over `[-π, π)` against the wrapped normal density.
    Wrapped {
        points: usize,
    },
}

impl PhaseRule {
    pub fn average<F: Fn(f64) -> f64>(&self, sigma: f64, f: F) -> f64 {
        match *self {
            PhaseRule::PointMass => f(0.0),
            PhaseRule::GaussHermite(rule) => rule.expect(|z| f(sigma * z)),
            PhaseRule::Wrapped { points } => wrapped_trapezoid(sigma, points, f),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PhaseRule::PointMass => "point-mass".to_string(),
            PhaseRule::GaussHermite(rule) => format!("gauss-hermite-{}", rule.len()),
            PhaseRule::Wrapped { points } => format!("wrapped-trapezoid-{points}"),
        }
    }
}

impl PhaseQuadrature {
    /// `E[f(φ)]` for `φ ~ N(0, σ²)`. `f` must be 2π-periodic.
    pub fn average<F: Fn(f64) -> f64>(&self, sigma: f64, f: F) -> Result<f64> {
        self.resolve(sigma, f).map(|(v, _)| v)
    }

    /// Like [`average`](Self::average) but also returns the rule that converged.
    pub fn resolve<F: Fn(f64) -> f64>(&self, sigma: f64, f: F) -> Result<(f64, PhaseRule)> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
                reason: "must be finite and non-negative",
            });
        }
        if sigma == 0.0 {
            return Ok((f(0.0), PhaseRule::PointMass));
        }

        let max_nodes = self.max_nodes.clamp(MIN_NODES, MAX_NODES);
        let mut n = MIN_NODES;
        let mut rule = PhaseRule::GaussHermite(QuadratureRule::cached(n)?);
        let mut prev = rule.average(sigma, &f);
        while n < max_nodes {
            n *= 2;
            rule = PhaseRule::GaussHermite(QuadratureRule::cached(n)?);
            let cur = rule.average(sigma, &f);
            if (cur - prev).abs() < self.tolerance {
                return Ok((cur, rule));
            }
            prev = cur;
        }

        let mut points = 64;
        let mut prev = wrapped_trapezoid(sigma, points, &f);
        let mut change = f64::INFINITY;
        while points < MAX_WRAPPED_POINTS {
            points *= 2;
            let cur = wrapped_trapezoid(sigma, points, &f);
            change = (cur - prev).abs();
            if change < self.tolerance {
                return Ok((cur, PhaseRule::Wrapped { points }));
            }
            prev = cur;
        }
        Err(Error::QuadratureNotConverged {
            nodes: max_nodes,
            change,
        })
    }
}

/// Density of `φ mod 2π` on `[-π, π)` for `φ ~ N(0, σ²)`.
pub fn wrapped_normal_density(phi: f64, sigma: f64) -> f64 {
    if sigma < 1.0 {
        let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
        (-3..=3)
            .map(|k| {
                let x = phi + 2.0 * PI * k as f64;
                norm * (-x * x / (2.0 * sigma * sigma)).exp()
            })
            .sum()
    } else {
        let mut acc = 1.0;
        for k in 1.. {
            let damp = (-0.5 * (k * k) as f64 * sigma * sigma).exp();
            if damp < 1e-18 {
                break;
            }
            acc += 2.0 * damp * (k as f64 * phi).cos();
        }
        acc / (2.0 * PI)
    }
}

fn wrapped_trapezoid<F: Fn(f64) -> f64>(sigma: f64, points: usize, f: F) -> f64 {
    let h = 2.0 * PI / points as f64;
    (0..points)
        .map(|j| {
            let phi = -PI + j as f64 * h;
            h * wrapped_normal_density(phi, sigma) * f(phi)
        })
        .sum()
}
