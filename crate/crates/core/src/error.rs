use thiserror::Error;

/// Failures reported by the library.
///
/// Parameter problems (`InvalidParameter`, `InvalidPurity`, ...) are caught
/// before any numerics run; the remaining variants come out of the Fock-space
/// oracle, the quadrature and the root finders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("purity {purity} outside the admissible interval ({lower}, 1]")]
    InvalidPurity { purity: f64, lower: f64 },

    #[error("transmissivity {0} outside (0, 1]")]
    InvalidTransmissivity(f64),

    #[error("energy budget exceeded: displacement energy would be {remaining}")]
    EnergyBudgetExceeded { remaining: f64 },

    #[error("Fock cutoff {hard_max} cannot reach tail {target_tail:e} (tail left: {tail:e})")]
    CutoffExceeded {
        hard_max: usize,
        target_tail: f64,
        tail: f64,
    },

    #[error("unitarity guard failed: max |U^dag U - I| = {deviation}")]
    UnitarityGuardFailed { deviation: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("quadrature did not converge with {nodes} nodes (last change {change})")]
    QuadratureNotConverged { nodes: usize, change: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenNotConverged,

    #[error("bracketing failed: {0}")]
    BracketingFailed(String),

    #[error("unknown kind `{0}`")]
    UnknownKind(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
