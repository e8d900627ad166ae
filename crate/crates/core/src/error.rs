use thiserror::Error;

/// Errors raised by model construction, checks and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative probability {value} at {location}")]
    NegativeProb { location: String, value: f64 },

    #[error("{what} sums to {sum}, not 1 (tolerance 1e-9)")]
    Normalization { what: String, sum: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("duplicate symbol {symbol:?} in alphabet {alphabet:?}")]
    DuplicateSymbol { alphabet: String, symbol: String },

    #[error("duplicate axis name {0:?}")]
    DuplicateAxis(String),

    #[error("alphabet product has {cells} cells, above the {max} cell cap")]
    TooLarge { cells: u128, max: usize },

    #[error("axis set is empty")]
    EmptyAxisSet,

    #[error("unknown axis {0:?}")]
    UnknownAxis(String),

    #[error("unknown symbol {symbol:?} on axis {axis:?}")]
    UnknownSymbol { axis: String, symbol: String },

    #[error("conditioning on zero-probability event {axis}={value}")]
    ZeroEvent { axis: String, value: String },

    #[error("axis subsets overlap on {0:?}")]
    AxisOverlap(String),

    #[error("statistic map has no entry for symbol {0:?}")]
    MissingSymbol(String),

    #[error("product of two statistics on the same domain {0:?}")]
    SameDomain(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("channels do not reproduce the family (max deviation {max_dev:e})")]
    CompositionMismatch { max_dev: f64 },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("auxiliary cardinality {u_card} outside 1..={max}")]
    CardTooLarge { u_card: usize, max: usize },

    #[error("distortion {d} below the minimum achievable {d_min}")]
    DistortionOutOfRange { d: f64, d_min: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("candidate parameters have no common support")]
    EmptyCommonSupport,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("model file: {0}")]
    Parse(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Stable upper-case code used in reports and across the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NegativeProb { .. } => "NEGATIVE_PROB",
            Error::Normalization { .. } => "NORMALIZATION",
            Error::ShapeMismatch(_) => "SHAPE_MISMATCH",
            Error::DuplicateSymbol { .. } => "DUPLICATE_SYMBOL",
            Error::DuplicateAxis(_) => "DUPLICATE_AXIS",
            Error::TooLarge { .. } => "TOO_LARGE",
            Error::EmptyAxisSet => "EMPTY_AXIS_SET",
            Error::UnknownAxis(_) => "UNKNOWN_AXIS",
            Error::UnknownSymbol { .. } => "UNKNOWN_SYMBOL",
            Error::ZeroEvent { .. } => "ZERO_EVENT",
            Error::AxisOverlap(_) => "AXIS_OVERLAP",
            Error::MissingSymbol(_) => "MISSING_SYMBOL",
            Error::SameDomain(_) => "SAME_DOMAIN",
            Error::DomainMismatch(_) => "DOMAIN_MISMATCH",
            Error::CompositionMismatch { .. } => "COMPOSITION_MISMATCH",
            Error::PreconditionFailed(_) => "PRECONDITION_FAILED",
            Error::CardTooLarge { .. } => "CARD_TOO_LARGE",
            Error::DistortionOutOfRange { .. } => "DISTORTION_OUT_OF_RANGE",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::NonFiniteInput(_) => "NONFINITE_INPUT",
            Error::EmptyCommonSupport => "EMPTY_COMMON_SUPPORT",
            Error::InvalidConfig(_) => "INVALID_CONFIG",
            Error::Parse(_) => "PARSE",
            Error::Io(_) => "IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
