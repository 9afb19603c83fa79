use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed CSV cell. `row` is 1-based and counts the header line.
    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        row: u64,
        column: String,
        message: String,
    },

    #[error("material {id}: {message}")]
    Validation { id: u32, message: String },

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("{quantity} = {value} is outside its domain ({expected})")]
    Domain {
        quantity: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "nonlinear iteration did not converge at tau = {time:.6e} after {halvings} step halvings"
    )]
    NonConvergence { time: f64, halvings: usize },

    #[error("numerical failure at tau = {time:.6e}: {message}")]
    NumericalFailure { time: f64, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            quantity,
            value,
            expected,
        }
    }
}
