use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: malformed input (`Parse`, `Json`,
/// `InvalidArgument`) and domain failures (everything else). The CLI maps
/// the first family to exit code 2 and the second to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero divisor")]
    ZeroDivisor,

    #[error("letter {letter} out of range for {generators} generators")]
    LetterOutOfRange { letter: i64, generators: usize },

    #[error("requires m ≥ 2")]
    RequiresTwoGenerators,

    #[error("mismatched ambient group: expected (m={m1}, d={d1}), found (m={m2}, d={d2})")]
    AmbientMismatch {
        m1: usize,
        d1: usize,
        m2: usize,
        d2: usize,
    },

    #[error("invalid action spec: {0}")]
    InvalidAction(String),

    #[error("ν undefined: the word part is trivial")]
    NuUndefined,

    #[error("n = {n} is below the validity threshold n0 = {n0}")]
    BelowThreshold { n: u64, n0: u64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("radius {radius} too large (maximum {max})")]
    RadiusTooLarge { radius: usize, max: usize },

    #[error("inconclusive: family `{0}` does not have a detectable limit")]
    Inconclusive(String),

    #[error("candidate `{0}` has a nonzero abelian part")]
    NonzeroAbelianPart(String),

    #[error("not in a common fiber: {0}")]
    NotInCommonFiber(String),

    #[error("word too long for the oracle: length {len} exceeds {max}")]
    WordTooLong { len: String, max: usize },

    #[error("mesh {0} too coarse (minimum 4)")]
    MeshTooCoarse(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for malformed input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Json(_)
                | Error::InvalidArgument(_)
                | Error::InvalidAction(_)
        )
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
