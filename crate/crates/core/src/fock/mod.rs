//! Truncated number-basis representation of the PSK signal states.
//!
//! This is the brute-force side of every check in the crate: states are built
//! by exponentiating truncated ladder-operator generators, phase diffusion is
//! applied entrywise, and discrimination bounds come from an eigen-solve of
//! `ρ₁ - ρ₂`.

mod build;
mod measure;

pub use build::{build_pair, build_state, build_state_at, CutoffPolicy};
pub use measure::{helstrom_mixed, homodyne_pdf_fock, trace_distance, HomodyneProjector};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::QuadratureStats;
use crate::linalg::hermitian_eigenvalues;

/// Dense density matrix `ρ_{n,m} = ⟨n|ρ|m⟩` on `{|0⟩, …, |n_max⟩}`.
///
/// The trace is never renormalized: whatever the truncation dropped is kept
/// in [`tail_mass`](Self::tail_mass).
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    entries: DMatrix<Complex64>,
}

/// Truncation summary attached to outputs that used the Fock oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationInfo {
    pub n_max: usize,
    pub tail_mass: f64,
}

impl FockDensityMatrix {
    /// Wraps a square matrix, forcing exact Hermiticity from its upper triangle.
    pub fn from_matrix(mut entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                left: entries.nrows(),
                right: entries.ncols(),
            });
        }
        let dim = entries.nrows();
        for n in 0..dim {
            entries[(n, n)].im = 0.0;
            for m in n + 1..dim {
                entries[(m, n)] = entries[(n, m)].conj();
            }
        }
        Ok(Self { entries })
    }

    /// `|ψ⟩⟨ψ|` for the given amplitudes.
    pub fn pure(amplitudes: &[Complex64]) -> Self {
        let dim = amplitudes.len();
        let entries = DMatrix::from_fn(dim, dim, |n, m| amplitudes[n] * amplitudes[m].conj());
        Self { entries }
    }

    /// `|n⟩⟨n|` in a space of the given dimension.
    pub fn number_state(dim: usize, n: usize) -> Self {
        assert!(n < dim, "number state {n} outside dimension {dim}");
        let mut entries = DMatrix::zeros(dim, dim);
        entries[(n, n)] = Complex64::new(1.0, 0.0);
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Highest retained photon number.
    pub fn n_max(&self) -> usize {
        self.dim().saturating_sub(1)
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.entries[(n, m)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|n| self.entries[(n, n)].re).sum()
    }

    /// Probability mass lost to truncation, `1 - Tr ρ`.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.trace()
    }

    pub fn truncation(&self) -> TruncationInfo {
        TruncationInfo {
            n_max: self.n_max(),
            tail_mass: self.tail_mass(),
        }
    }

    pub fn photon_distribution(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.entries[(n, n)].re).collect()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Zero-pads to a larger dimension.
    pub fn padded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim(), "cannot pad {} down to {dim}", self.dim());
        let mut entries = DMatrix::zeros(dim, dim);
        entries
            .view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.entries);
        Self { entries }
    }

    /// `U_φ ρ U_φ†` with `U_φ = e^{-iφ a†a}`.
    pub fn rotated(&self, phase: f64) -> Self {
        let dim = self.dim();
        let entries = DMatrix::from_fn(dim, dim, |n, m| {
            self.entries[(n, m)] * Complex64::from_polar(1.0, -(n as f64 - m as f64) * phase)
        });
        Self { entries }
    }

    /// `V ρ V†` for an arbitrary matrix `V` of matching size.
    pub fn conjugated(&self, v: &DMatrix<Complex64>) -> Result<Self> {
        if v.nrows() != self.dim() || v.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: v.nrows(),
            });
        }
        Self::from_matrix(v * &self.entries * v.adjoint())
    }

    /// Applies Gaussian phase diffusion of strength `σ`:
    /// `ρ_{n,m} ← e^{-(n-m)²σ²/2} ρ_{n,m}`.
    pub fn dephased(&self, sigma: f64) -> Self {
        let dim = self.dim();
        let half_var = 0.5 * sigma * sigma;
        let damping: Vec<f64> = (0..dim).map(|k| (-((k * k) as f64) * half_var).exp()).collect();
        let entries = DMatrix::from_fn(dim, dim, |n, m| self.entries[(n, m)] * damping[n.abs_diff(m)]);
        Self { entries }
    }

    /// Mean and variance of `x = a + a†` (rotated by `phase` first).
    ///
    /// Uses only matrix elements inside the truncated space, so it is exact up
    /// to the recorded tail mass.
    pub fn quadrature_stats(&self, phase: f64) -> QuadratureStats {
        let dim = self.dim();
        let (s, c) = phase.sin_cos();
        let rot = Complex64::new(c, s);
        // ⟨a⟩ = Σ √n ρ_{n,n-1}; ⟨a²⟩ = Σ √(n(n-1)) ρ_{n,n-2}; ⟨a†a⟩ = Σ n ρ_{n,n}
        let mut a1 = Complex64::new(0.0, 0.0);
        let mut a2 = Complex64::new(0.0, 0.0);
        let mut num = 0.0;
        for n in 0..dim {
            let nf = n as f64;
            num += nf * self.entries[(n, n)].re;
            if n >= 1 {
                a1 += nf.sqrt() * self.entries[(n, n - 1)];
            }
            if n >= 2 {
                a2 += (nf * (nf - 1.0)).sqrt() * self.entries[(n, n - 2)];
            }
        }
        // x_φ = a e^{-iφ} + h.c. is measured on U_φ ρ U_φ†, i.e. x_0 on the rotated
        // state, whose ⟨a⟩ picks up e^{-iφ}.
        let a1 = a1 * rot.conj();
        let a2 = a2 * rot.conj() * rot.conj();
        let mean = 2.0 * a1.re;
        let second = 2.0 * a2.re + 2.0 * num + self.trace();
        QuadratureStats {
            mean,
            variance: second - mean * mean,
        }
    }
}

/// Free-function form of [`FockDensityMatrix::dephased`].
pub fn dephase(rho: &FockDensityMatrix, sigma: f64) -> FockDensityMatrix {
    rho.dephased(sigma)
}
