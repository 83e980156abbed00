use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::FockDensityMatrix;
use crate::error::{Error, Result};

/// `½ Tr|ρ₁ - ρ₂|` from the eigenvalues of the Hermitian difference.
pub fn trace_distance(rho1: &FockDensityMatrix, rho2: &FockDensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            left: rho1.dim(),
            right: rho2.dim(),
        });
    }
    let diff = rho1.entries() - rho2.entries();
    let eig = crate::linalg::hermitian_eigenvalues(&diff);
    Ok(0.5 * eig.iter().map(|l| l.abs()).sum::<f64>())
}

/// Minimum error probability for equal priors, `½(1 - D(ρ₁, ρ₂))`.
pub fn helstrom_mixed(rho1: &FockDensityMatrix, rho2: &FockDensityMatrix) -> Result<f64> {
    Ok(0.5 * (1.0 - trace_distance(rho1, rho2)?))
}

/// Homodyne density of `x = a + a†` for `ρ`, `Σ ψ_n(x) ψ_m(x) ρ_{n,m}`.
pub fn homodyne_pdf_fock(rho: &FockDensityMatrix, x: f64) -> f64 {
    HomodyneProjector::new(rho).pdf(x)
}

/// Reusable homodyne evaluator for one state.
///
/// Only the real part of `ρ` contributes because the wavefunctions are real;
/// levels whose population is below `1e-24` are dropped (their coherences are
/// bounded by `√(ρ_nn ρ_mm)`).
#[derive(Debug, Clone)]
pub struct HomodyneProjector {
    real: DMatrix<f64>,
}

impl HomodyneProjector {
    pub fn new(rho: &FockDensityMatrix) -> Self {
        let pops = rho.photon_distribution();
        let top = pops.iter().rposition(|&p| p > 1e-24).unwrap_or(0);
        let keep = top + 1;
        let real = DMatrix::from_fn(keep, keep, |n, m| rho.get(n, m).re);
        Self { real }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let psi = wavefunctions(x, self.real.nrows());
        psi.dot(&(&self.real * &psi))
    }

    /// `P(x ≥ 0)`, by composite Simpson on `[0, X]` where `X` lies well past the
    /// classical turning point of the highest retained level.
    pub fn positive_probability(&self) -> f64 {
        self.integrate(0.0, self.support())
    }

    /// `P(x < 0)`.
    pub fn negative_probability(&self) -> f64 {
        self.integrate(-self.support(), 0.0)
    }

    fn support(&self) -> f64 {
        2.0 * (self.real.nrows() as f64 + 0.5).sqrt() + 10.0
    }

    /// Composite Simpson with step at most 0.005.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let mut intervals = ((hi - lo) / 0.005).ceil() as usize;
        intervals += intervals % 2;
        let h = (hi - lo) / intervals as f64;
        let mut acc = self.pdf(lo) + self.pdf(hi);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.pdf(lo + i as f64 * h);
        }
        acc * h / 3.0
    }
}

/// `ψ_n(x) = (2π)^{-1/4} (2ⁿn!)^{-1/2} H_n(x/√2) e^{-x²/4}` for `n < dim`,
/// by the normalized upward recurrence
/// `ψ_{n+1} = (x ψ_n - √n ψ_{n-1}) / √(n+1)`.
pub fn wavefunctions(x: f64, dim: usize) -> DVector<f64> {
    let mut psi = DVector::zeros(dim);
    if dim == 0 {
        return psi;
    }
    psi[0] = (2.0 * PI).powf(-0.25) * (-0.25 * x * x).exp();
    if dim > 1 {
        psi[1] = x * psi[0];
    }
    for n in 1..dim - 1 {
        let nf = n as f64;
        psi[n + 1] = (x * psi[n] - nf.sqrt() * psi[n - 1]) / (nf + 1.0).sqrt();
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_pair, build_state, CutoffPolicy};
    use crate::gaussian::{budget_to_seed, ChannelBudget, SeedState, Sign};
    use approx::assert_abs_diff_eq;

    #[test]
    fn trace_distance_examples() {
        let zero = FockDensityMatrix::number_state(3, 0);
        let one = FockDensityMatrix::number_state(3, 1);
        assert_eq!(trace_distance(&zero, &zero).unwrap(), 0.0);
        assert_abs_diff_eq!(trace_distance(&zero, &one).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(helstrom_mixed(&zero, &zero).unwrap(), 0.5, epsilon = 1e-15);
        let big = FockDensityMatrix::number_state(4, 0);
        assert!(matches!(
            trace_distance(&zero, &big),
            Err(Error::DimensionMismatch { left: 3, right: 4 })
        ));
    }

    #[test]
    fn pure_pair_trace_distance() {
        // Overlap² = exp(-8) at N = 1, β = 1/3.
        let seed = budget_to_seed(&ChannelBudget::new(1.0, 1.0 / 3.0).unwrap(), 1.0).unwrap();
        let (p, m) = build_pair(&seed, &CutoffPolicy::default()).unwrap();
        let d = trace_distance(&p, &m).unwrap();
        assert_abs_diff_eq!(d, (1.0 - (-8.0f64).exp()).sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(d, 0.999832, epsilon = 1e-6);
    }

    #[test]
    fn coherent_helstrom() {
        let seed = SeedState::coherent(1.0).unwrap();
        let (p, m) = build_pair(&seed, &CutoffPolicy::default()).unwrap();
        let expect = 0.5 * (1.0 - (1.0 - (-4.0f64).exp()).sqrt());
        assert_abs_diff_eq!(helstrom_mixed(&p, &m).unwrap(), expect, epsilon = 1e-12);
        assert_abs_diff_eq!(expect, 4.60007e-3, epsilon = 1e-8);
    }

    #[test]
    fn vacuum_pdf_peak() {
        let vac = FockDensityMatrix::number_state(5, 0);
        assert_abs_diff_eq!(homodyne_pdf_fock(&vac, 0.0), 0.3989422804014327, epsilon = 1e-15);
    }

    #[test]
    fn coherent_pdf_is_gaussian() {
        let rho = build_state(&SeedState::coherent(1.0).unwrap(), Sign::Plus, &CutoffPolicy::default()).unwrap();
        for x in [0.0, 1.0, 2.0, 3.0] {
            let expect = (-(x - 2.0f64).powi(2) / 2.0).exp() / (2.0 * PI).sqrt();
            assert_abs_diff_eq!(homodyne_pdf_fock(&rho, x), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn dephased_pdf_normalized() {
        let seed = budget_to_seed(&ChannelBudget::new(1.0, 1.0 / 3.0).unwrap(), 1.0).unwrap();
        let rho = build_state(&seed, Sign::Plus, &CutoffPolicy::default())
            .unwrap()
            .dephased(0.5);
        let proj = HomodyneProjector::new(&rho);
        // trapezoid on [-16, 16], step 0.01
        let h = 0.01;
        let n = 3200;
        let mut acc = 0.5 * (proj.pdf(-16.0) + proj.pdf(16.0));
        for i in 1..n {
            acc += proj.pdf(-16.0 + i as f64 * h);
        }
        assert_abs_diff_eq!(acc * h, 1.0, epsilon = 1e-8);
        let total = proj.positive_probability() + proj.negative_probability();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn wavefunctions_orthonormal() {
        // Gauss–Hermite-free check: trapezoid on a wide grid is spectrally accurate.
        let dim = 12;
        let h = 0.01;
        let mut gram = DMatrix::<f64>::zeros(dim, dim);
        let mut x = -25.0;
        while x <= 25.0 {
            let psi = wavefunctions(x, dim);
            gram += &psi * psi.transpose() * h;
            x += h;
        }
        for i in 0..dim {
            for j in 0..dim {
                let target = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[(i, j)], target, epsilon = 1e-10);
            }
        }
    }
}
