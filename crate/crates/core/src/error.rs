use thiserror::Error;

pub type Result<T> = std::result::Result<T, PfrmtError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PfrmtError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("non-finite value encountered: {0}")]
    Numeric(String),
    #[error("matrix is singular or ill-conditioned (reciprocal condition estimate {rcond:.3e})")]
    SingularMatrix { rcond: f64 },
    #[error("coincident shift parameters: {0}")]
    DegenerateShift(String),
    #[error("reduction not available for this ensemble: {0}")]
    UnsupportedReduction(String),
    #[error("moment diverges: {0}")]
    DivergentMoment(String),
    #[error("shift lies on the spectral support: {0}")]
    OnSupport(String),
    #[error("parameters outside the supported regime: {0}")]
    Regime(String),
    #[error("skew Gram-Schmidt broke down at pair {step}")]
    Breakdown { step: usize },
    #[error("quadrature budget exceeded: {nodes} nodes requested, cap is {cap}")]
    Budget { nodes: f64, cap: f64 },
    #[error("oracle does not support this ensemble: {0}")]
    UnsupportedOracle(String),
    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl PfrmtError {
    /// Stable machine-readable tag, used in CLI error objects and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            PfrmtError::Dimension(_) => "DimensionError",
            PfrmtError::Numeric(_) => "NumericError",
            PfrmtError::SingularMatrix { .. } => "SingularMatrixError",
            PfrmtError::DegenerateShift(_) => "DegenerateShiftError",
            PfrmtError::UnsupportedReduction(_) => "UnsupportedReductionError",
            PfrmtError::DivergentMoment(_) => "DivergentMomentError",
            PfrmtError::OnSupport(_) => "OnSupportError",
            PfrmtError::Regime(_) => "RegimeError",
            PfrmtError::Breakdown { .. } => "BreakdownError",
            PfrmtError::Budget { .. } => "BudgetError",
            PfrmtError::UnsupportedOracle(_) => "UnsupportedOracleError",
            PfrmtError::Config { .. } => "ConfigError",
            PfrmtError::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for PfrmtError {
    fn from(e: std::io::Error) -> Self {
        PfrmtError::Io(e.to_string())
    }
}
