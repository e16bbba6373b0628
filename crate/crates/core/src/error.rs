use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Variants split into two broad categories: malformed input or violated
/// preconditions (data errors) and failures of the numerical routines
/// themselves (see [`Error::is_numeric`]). Readers never panic on malformed
/// files; every failure mode surfaces as one of these variants.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    // ---- tabular / file ingestion ----
    #[error("row {row}: {msg}")]
    Csv { row: usize, msg: String },

    #[error("duplicate id {id:?} at rows {first_row} and {second_row}")]
    DuplicateId {
        id: String,
        first_row: usize,
        second_row: usize,
    },

    #[error("row {row}: score {value} outside [0, 1]")]
    ScoreOutOfRange { row: usize, value: f64 },

    #[error("row {row}, feature {col}: value is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("expected {expected} scores, got {got}")]
    ScoresLengthMismatch { expected: usize, got: usize },

    #[error("feature dimension must be at least 1")]
    EmptyDimension,

    // ---- binary format ----
    #[error("bad magic {found:?}, expected \"FSET\"")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported format version {found}")]
    UnsupportedVersion { found: u32 },

    #[error("truncated file while reading {what}: needed {expected} bytes, {got} remain")]
    Truncated {
        what: &'static str,
        expected: u64,
        got: u64,
    },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    // ---- parameter grids ----
    #[error("grid declares {combos} parameter combinations but assigns {assigned} ids")]
    GridCountMismatch { combos: usize, assigned: usize },

    #[error("id {id:?} assigned to more than one parameter combination")]
    GridDuplicateAssignment { id: String },

    #[error("invalid grid: {msg}")]
    GridInvalid { msg: String },

    #[error("unknown parameter {name:?}")]
    UnknownParameter { name: String },

    #[error("unknown value {value:?} for parameter {parameter:?}")]
    UnknownValue { parameter: String, value: String },

    // ---- model fitting and evaluation ----
    #[error("need at least 2 rows to fit a model, got {n}")]
    TooFewRows { n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariance factorization failed: {diagnostics}")]
    FactorizationFailed { diagnostics: String },

    #[error("eigendecomposition failed: {msg}")]
    EigenFailed { msg: String },

    // ---- analysis preconditions ----
    #[error("empty {what}")]
    EmptyInput { what: &'static str },

    #[error("test set carries no detection scores")]
    ScoresAbsent,

    #[error("fraction {value} outside (0, 1]")]
    BadFraction { value: f64 },

    #[error("histogram range [{lo}, {hi}] is empty")]
    BadHistogramRange { lo: f64, hi: f64 },

    #[error("unknown id {id:?}")]
    UnknownId { id: String },

    // ---- selection ----
    #[error("selection count {count} exceeds pool size {pool}")]
    CountExceedsPool { count: usize, pool: usize },

    #[error("non-finite distance for id {id:?}")]
    NonFiniteDistance { id: String },

    #[error("invalid argument: {msg}")]
    InvalidArgument { msg: String },
}

impl Error {
    /// True for failures of the numerics (factorization, eigensolve) as
    /// opposed to malformed input. The CLI maps these to a distinct exit code.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::FactorizationFailed { .. } | Error::EigenFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
