use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Verification routines never return these for mathematical violations;
/// violations are collected in their reports instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("non-integer power of an interval with negative lower endpoint")]
    NegativeBase,
    #[error("negative power of an interval containing zero")]
    ZeroToNegative,
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("series diverges: ratio upper bound {0} is not below 1")]
    DivergentSeries(String),
    #[error("precision {0} is below the supported minimum")]
    InvalidPrecision(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("string {word} exceeds supported depth {max}")]
    DepthExceeded { word: String, max: usize },
    #[error("table has no entry for {0}")]
    MissingNode(String),
    #[error("measure value at {0} is not positive")]
    NonPositiveNode(String),
    #[error("zero-measure node {0} in a conversion context")]
    ZeroMeasureNode(String),
    #[error("negative payoff at {0}")]
    NegativePayoff(String),

    #[error("staged oracle decreased at {word}: stage {earlier} gave {earlier_value}, stage {later} gave {later_value}")]
    MonotonicityViolation {
        word: String,
        earlier: u32,
        later: u32,
        earlier_value: String,
        later_value: String,
    },
    #[error("staged payoff requires a stage")]
    StageRequired,
    #[error("operation needs two-sided enclosures but the payoff is staged")]
    OneSided,

    #[error("root sum for d_U^t is not demonstrably finite at {0}")]
    UnboundedRoot(String),
    #[error("measure is not well-balanced under the given certificate: {0}")]
    NotWellBalanced(String),
    #[error("source capital at the root exceeds 1 after normalization: {0}")]
    RootUnbounded(String),
    #[error("source is not a supergale: violation at {0}")]
    NotASupergale(String),
    #[error("invalid conversion plan: {0}")]
    InvalidPlan(String),
    #[error("no balance certificate: {0}")]
    NoCertificate(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("depth {depth} exceeds the cap {cap}; pass --allow-deep to override")]
    DepthCap { depth: usize, cap: usize },
    #[error("unknown strategy {0}")]
    UnknownStrategy(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
