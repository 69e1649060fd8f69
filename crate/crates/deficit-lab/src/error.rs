use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("integration did not converge: error estimate {error_estimate:e} after {subdivisions} subdivisions")]
    NonConvergence {
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("integrand returned a non-finite value at {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("dimension {0} not supported (tensor quadrature is limited to n <= 3)")]
    DimensionTooLarge(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation time must be positive for every component: t + t_i = {0}")]
    NonPositiveTime(f64),

    #[error("finite-difference step {step} too large for scale {scale}")]
    StepTooLarge { step: f64, scale: f64 },

    #[error("mixture has a component with zero time offset; u(.,0) is not a smooth density")]
    ZeroTimeComponent,

    #[error("need at least {needed} points above the noise floor, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("combined log-prefactor {0} exceeds the overflow guard; assembly bug upstream")]
    OverflowGuard(f64),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("mixture parse error: {0}")]
    MixtureParse(String),

    #[error("experiment failed: {0} check(s) did not pass")]
    ExperimentFailure(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
