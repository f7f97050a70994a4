use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row index {index} out of range for a matrix with {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },

    #[error("packed bit matrices support at most 64 columns, got {0}")]
    TooManyColumns(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("generator matrix is singular over GF(2) (rank {rank} < {m})")]
    Singular { rank: usize, m: usize },

    #[error("Walsh index needs {needed} bits but the point precision is {bits}")]
    Precision { needed: u32, bits: u32 },

    #[error("tractability guard: {0}")]
    Guard(String),

    #[error("direction numbers, line {line}: {reason}")]
    DirectionFile { line: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("median needs an odd number of values, got {0}")]
    EvenLength(usize),

    #[error("rate fit needs at least {needed} usable points, got {got}")]
    DegenerateFit { needed: usize, got: usize },

    #[error("integrand `{0}` carries no Lipschitz metadata")]
    MissingMetadata(String),

    #[error("unknown integrand `{0}`")]
    UnknownIntegrand(String),

    #[error("sign independence needs two distinct index sets")]
    EqualSets,

    #[error("nothing to plot")]
    EmptySeries,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
