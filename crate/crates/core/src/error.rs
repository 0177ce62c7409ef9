use thiserror::Error;

use crate::model::BathRole;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures of the physics layer: model validation, steady-state solving,
/// flux bookkeeping and root finding.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("bath role {0:?} given more than once")]
    DuplicateBath(BathRole),

    #[error("bath role {0:?} missing")]
    MissingBath(BathRole),

    #[error("unknown Liouvillian variant `{0}` (expected `secular` or `partial`)")]
    UnknownVariant(String),

    /// The generator has more than one stationary state.
    #[error("degenerate kernel: numerical rank {rank} < 8 (smallest singular values {sv:?})")]
    DegenerateKernel { rank: usize, sv: [f64; 2] },

    #[error("steady-state residual {residual:e} exceeds tolerance {tolerance:e}")]
    NoConvergence { residual: f64, tolerance: f64 },

    #[error("steady state is not a valid density matrix: {0}")]
    UnphysicalState(String),

    #[error("first law violated: |J_E + J_C + J_B| = {residual:e}, max|J| = {scale:e}")]
    FirstLawViolation { residual: f64, scale: f64 },

    #[error("finite-difference step {step:e} collapsed below resolution at T_B = {t_b}")]
    StepUnderflow { step: f64, t_b: f64 },

    #[error("sigma_B does not change sign on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
}
