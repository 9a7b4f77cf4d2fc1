use thiserror::Error;

/// Errors raised by the models, the series solver and the stability tools.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("amplitude {rho} is at or below the floor {floor}; the slow-flow vector field is singular there")]
    AmplitudeSingular { rho: f64, floor: f64 },

    #[error("phase is undefined at the origin u = u' = 0")]
    PhaseUndefined,

    #[error("sweep rate must be positive for captured solutions to exist (alpha = {alpha})")]
    NonPositiveLambda { alpha: f64 },

    #[error("drive amplitude must be positive (f0 = {f0})")]
    NonPositiveDrive { f0: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("|m| = {m} coincides with m_* = {m_star}: no power-series solution exists")]
    DegeneratePumping { m: f64, m_star: f64 },

    #[error("branch {branch} is not present for these parameters")]
    BranchAbsent { branch: u8 },

    #[error("recurrence matrix at order {order} is singular (condition number {condition:e})")]
    SingularRecurrence { order: usize, condition: f64 },
}

impl ModelError {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        ModelError::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
