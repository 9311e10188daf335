use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("target index {index} out of range 1..={p}")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("no nuisance columns: p = 1, use the univariate intervals instead")]
    NoNuisance,

    #[error("singular design")]
    SingularDesign,

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("target covariate collinear with nuisance block")]
    Collinear,

    #[error(
        "solver did not converge after {iterations} iterations (stationarity {stationarity:e})"
    )]
    NotConverged {
        iterations: usize,
        stationarity: f64,
    },

    #[error("insufficient sample for level: n = {n}, alpha = {alpha}")]
    InsufficientSample { n: usize, alpha: f64 },

    #[error("degenerate covariate: all x are zero")]
    DegenerateCovariate,

    #[error("csv error at row {row}, column {column}: {message}")]
    Csv {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
