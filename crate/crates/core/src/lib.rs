//! Binary phase-shift keying with displaced squeezed states.
//!
//! The crate evaluates minimum-error (Helstrom) and homodyne discrimination of
//! the pair `D(±α) S(r) ν(N_th) S†(r) D†(±α)` at a fixed mean photon number,
//! with optional Gaussian phase diffusion and thermal impurity of the seed.
//!
//! * [`gaussian`]: parameter types, the energy constraint and the loss map.
//! * [`fock`]: truncated number-basis states used as an independent oracle.
//! * [`receiver`]: homodyne error probabilities and large-`N` asymptotics.
//! * [`analysis`]: Helstrom closed forms, squeezing thresholds and scans.

pub mod analysis;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod quadrature;
pub mod receiver;

pub use analysis::{
    beta_closed_forms, beta_threshold_numeric, evaluate_metric, g_function, helstrom_noisy, helstrom_pure,
    helstrom_pure_seed, scan, sigma_threshold, AnalysisSettings, BetaClosedForms, FigureId, GridSpec, Metric,
    ScanRequest, ScanSettings, ScanTable, ThresholdOutcome, ThresholdResult,
};
pub use error::{Error, Result};
pub use fock::{build_pair, build_state, dephase, helstrom_mixed, trace_distance, CutoffPolicy, FockDensityMatrix};
pub use gaussian::{budget_to_seed, loss_map, ChannelBudget, LossOutcome, LossyPreparation, SeedState, Sign};
pub use quadrature::PhaseQuadrature;
pub use receiver::{error_probability, error_probability_pure, AsymptoticKind, PhaseNoise};
