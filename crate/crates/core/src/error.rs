use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("measurement set is not informationally complete (operator span rank {rank} of {required})")]
    NotInformationallyComplete { rank: usize, required: usize },

    #[error("no counts recorded")]
    NoCounts,

    #[error("projection onto a null outcome (probability {0:.3e})")]
    NullProjection(f64),

    #[error("infeasible source targets: {0}")]
    InfeasibleSource(String),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 for validation failures, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotInformationallyComplete { .. }
            | Error::NullProjection(_)
            | Error::NoCounts
            | Error::InfeasibleSource(_) => 3,
            _ => 2,
        }
    }
}
