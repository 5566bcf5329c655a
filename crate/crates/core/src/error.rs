use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(
        "quadrature did not reach tolerance after {subintervals} subintervals \
         (estimate {value:e}, achieved error {error:e})"
    )]
    QuadratureFailure {
        value: f64,
        error: f64,
        subintervals: usize,
    },

    #[error("inverse-CDF table failed its self-check: {0}")]
    TabulationFailure(String),

    #[error("invalid cavity geometry: {0}")]
    InvalidGeometry(String),

    #[error(
        "inconsistent inputs: output-coupler transmittance {coupler} exceeds \
         the total round-trip loss {total}"
    )]
    NegativeLoss { coupler: f64, total: f64 },

    #[error("too few resolvable peaks: found {found}, need at least 3")]
    TooFewPeaks { found: usize },

    #[error("singular normal matrix: {0}")]
    SingularNormalMatrix(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
