use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the potential, orbit, radial, geometry and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value of {what} at t = {at}")]
    NonFinite { what: &'static str, at: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("iteration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("x = {x} lies outside the orbit interval ({lo}, {hi})")]
    DomainError { x: f64, lo: f64, hi: f64 },

    #[error("continuation did not stabilize: {0}")]
    NoStabilization(String),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("label error: {0}")]
    LabelError(String),

    #[error("distance target set is empty")]
    EmptyTarget,

    #[error("Newton iteration diverged: {0}")]
    NewtonDivergence(String),

    #[error("non-finite data: {0}")]
    NonFiniteData(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NonFinite { .. } => "NonFinite",
            Error::HypothesisViolation(_) => "HypothesisViolation",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::DomainError { .. } => "DomainError",
            Error::NoStabilization(_) => "NoStabilization",
            Error::DegenerateDomain(_) => "DegenerateDomain",
            Error::LabelError(_) => "LabelError",
            Error::EmptyTarget => "EmptyTarget",
            Error::NewtonDivergence(_) => "NewtonDivergence",
            Error::NonFiniteData(_) => "NonFiniteData",
            Error::PreconditionViolation(_) => "PreconditionViolation",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
