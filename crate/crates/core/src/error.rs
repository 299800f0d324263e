use thiserror::Error;

/// Errors shared across the library.
///
/// Contract violations (extending a prefix with a used image, querying the
/// same string twice, honesty breaches) are reported through this type so
/// runners can abort with a diagnostic instead of panicking.
#[derive(Debug, Error)]
pub enum PermLabError {
    #[error("invalid extension: {0}")]
    InvalidExtension(String),

    #[error("invalid prefix partial permutation: {0}")]
    InvalidPrefix(String),

    #[error("invalid permutation table: {0}")]
    InvalidTable(String),

    #[error("length out of range: {0}")]
    LengthOutOfRange(String),

    #[error("infeasible enumeration: max_length {requested} exceeds guard {guard}")]
    InfeasibleEnumeration { requested: u32, guard: u32 },

    #[error("degenerate test-language block: {0}")]
    DegenerateBlock(String),

    #[error("inconsistent block status: {0}")]
    InconsistentStatus(String),

    #[error("invalid event oracle: {0}")]
    InvalidOracle(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("mismatched list lengths: {0}")]
    MismatchedLengths(String),

    #[error("set is not prefix-free: {0}")]
    NotPrefixFree(String),

    #[error("illegal move at step {step}: {reason}")]
    IllegalMove { step: usize, reason: String },

    #[error("dishonest bet at step {step}: {reason}")]
    DishonestBet { step: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PermLabError>;
