use thiserror::Error;

/// Errors produced by the library. Each variant maps onto a process exit code
/// through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("kernel evaluation at ({i}, {j}) is not finite")]
    NonFinite { i: usize, j: usize },

    #[error("matrix is numerically rank deficient ({0}); choose different points")]
    RankDeficient(String),

    #[error("no convergence after {iterations} iterations (last estimate {last})")]
    Convergence { iterations: usize, last: f64 },

    #[error("constant function is not representable on this grid (residual {residual:e})")]
    ConstantNotRepresentable { residual: f64 },

    #[error("c_sq = {c_sq} leaves an indefinite kernel (smallest eigenvalue {min_eig:e})")]
    InvalidConstant { c_sq: f64, min_eig: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("herding reached the truncation boundary at step {t}")]
    Boundary { t: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// 2 for usage and input problems, 3 for numerical failures, 4 for
    /// invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_)
            | Error::Precondition(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::Invariant(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
