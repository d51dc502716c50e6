use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the gamma code is defined only for positive integers")]
    GammaZero,
    #[error("bit stream ended in the middle of a codeword")]
    Truncated,
    #[error("malformed gamma codeword: {zeros} leading zeroes")]
    MalformedGamma { zeros: u32 },
    #[error("value {value} does not fit in {width} bits")]
    Overflow { value: u64, width: u32 },

    #[error("empirical entropy of an empty sequence is undefined")]
    EmptyInput,
    #[error("context order {k} is too large for a sequence of length {n}")]
    OrderTooLarge { k: usize, n: usize },
    #[error("De Bruijn order {0} is outside 1..=24")]
    DebruijnOrder(u32),

    #[error("probability vector contains a zero or negative entry")]
    ZeroProbability,
    #[error("probability vector does not sum to one")]
    NotNormalized,
    #[error("probability vector is not sorted nonincreasing")]
    NotSorted,
    #[error("codeword lengths violate the Kraft inequality")]
    KraftViolation,
    #[error("invalid codeword length {0}")]
    InvalidLength(u32),
    #[error("codeword lengths are not sorted nondecreasing by rank")]
    LengthsNotSorted,
    #[error("symbol {0} is not in the code")]
    UnknownSymbol(u32),
    #[error("bit window does not begin with a codeword")]
    InvalidPrefix,

    #[error("symbol {symbol} is outside the alphabet of size {sigma}")]
    SymbolOutOfRange { symbol: u32, sigma: u32 },
    #[error("corrupt stream: {0}")]
    CorruptStream(String),
    #[error("position {got} does not follow position {last}")]
    NonMonotonePosition { last: u64, got: u64 },
    #[error("context space sigma^k = {contexts} exceeds the budget of {budget}")]
    ContextSpace { contexts: u128, budget: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input contains the sentinel symbol")]
    SentinelInInput,
    #[error("malformed transform: {0}")]
    MalformedTransform(&'static str),
    #[error("malformed run-length token stream: {0}")]
    MalformedToken(&'static str),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("bad container magic")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown codec id {0}")]
    UnknownCodec(u8),
    #[error("container checksum mismatch")]
    ChecksumMismatch,
    #[error("container parameters do not match: {0}")]
    ParameterMismatch(String),
}

impl Error {
    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::CorruptStream(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors that indicate damaged input rather than misuse.
    pub fn is_corruption(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_corruption(),
            Error::Truncated
            | Error::MalformedGamma { .. }
            | Error::InvalidPrefix
            | Error::CorruptStream(_)
            | Error::MalformedTransform(_)
            | Error::MalformedToken(_)
            | Error::BadMagic
            | Error::UnsupportedVersion(_)
            | Error::UnknownCodec(_)
            | Error::ChecksumMismatch
            | Error::ParameterMismatch(_)
            | Error::SymbolOutOfRange { .. }
            | Error::KraftViolation
            | Error::InvalidLength(_) => true,
            _ => false,
        }
    }
}
