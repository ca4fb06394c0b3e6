//! Error type shared by every pipeline stage.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the inference pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A closed-form log-density (or derivative) was requested from a model
    /// that does not provide one.
    #[error("model `{model}` has no {what} oracle")]
    OracleUnavailable { model: &'static str, what: &'static str },

    /// A log-likelihood term evaluated to NaN or -inf.
    #[error("non-finite log-likelihood contribution {value} at observation {index}")]
    NonFiniteLikelihood { index: usize, value: f64 },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed to converge (best error estimate {err:e})")]
    QuadratureFailure { err: f64 },

    /// Every importance weight of one observation underflowed to zero.
    #[error("all {m} importance weights are zero at observation {index} (proposal mismatch)")]
    AllWeightsZero { index: usize, m: usize },

    /// A moment statistic sits on the parameter-space boundary.
    #[error("degenerate data: {reason}")]
    DegenerateData { reason: String },

    /// Grid points left the admissible open parameter interval.
    #[error("grid leaves the open parameter interval ({lower}, {upper}); offending points {points:?}")]
    GridOutOfBounds { lower: f64, upper: f64, points: Vec<f64> },

    /// The normal-equations matrix is numerically singular.
    #[error("design matrix close to singular (condition estimate {cond:e} > {limit:e})")]
    SingularDesign { cond: f64, limit: f64 },

    /// The cubic has no stationary local maximum in range.
    #[error("cubic surrogate has no interior local maximum")]
    NoInteriorMax,

    /// The fitted quadratic coefficient is not negative.
    #[error("degenerate fit: quadratic coefficient {beta2} >= 0")]
    DegenerateFit { beta2: f64 },

    /// One-step update requested with information <= 0.
    #[error("non-positive information {info}")]
    NonpositiveInformation { info: f64 },

    /// A scalar argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
