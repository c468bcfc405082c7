use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },

    #[error("grid spacing mismatch: {left} vs {right}")]
    GridMismatch { left: f64, right: f64 },

    #[error("density is not finite at {at}")]
    NonFiniteDensity { at: f64 },

    #[error("truncated tail mass {tail_mass:e} exceeds budget {tau:e}")]
    TailBudgetExceeded { tail_mass: f64, tau: f64 },

    #[error("pmf has no positive probability to sample from")]
    DegeneratePmf,

    #[error("mu = {mu} is not a lattice point for delta = {delta}")]
    OffLatticeMu { mu: f64, delta: f64 },

    #[error("bound {value} is not a lattice point for delta = {delta}")]
    OffLatticeBound { value: f64, delta: f64 },

    #[error("poisson input requires delta = 1, got {delta}")]
    PoissonNeedsUnitDelta { delta: f64 },

    #[error("family `{family}` has no pure-epsilon closed form to calibrate against")]
    UncalibratableFamily { family: &'static str },

    #[error("ratio bound c_b = {c_b} is below 1")]
    SubUnitRatio { c_b: f64 },

    #[error("pmf window is empty")]
    EmptyWindow,

    #[error("no window point lies strictly inside the boundary M = {boundary}")]
    EmptyTheta1 { boundary: f64 },

    #[error("the gaussian closed form needs a boundary M")]
    MissingBoundary,

    #[error("noise support half-width {have} is narrower than the required {need}")]
    SupportTooNarrow { have: f64, need: f64 },

    #[error("simplex exceeded {iterations} iterations")]
    IterationLimit { iterations: usize },

    #[error("linear program is infeasible{}", residual.map(|r| format!(" (phase-1 residual {r:e})")).unwrap_or_default())]
    Infeasible { residual: Option<f64> },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
