use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is too small to normalize")]
    ZeroVector { norm: f64 },
    #[error("vector norm {norm} is not within 1e-9 of 1")]
    NotUnit { norm: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("dimension {0} is below the minimum of 2")]
    DimTooSmall(usize),
    #[error("invalid code parameters n={n}, alpha={alpha}")]
    InvalidParams { n: usize, alpha: usize },
    #[error("invalid codeword: {0}")]
    InvalidCodeword(String),
    #[error("requested {count} codewords but the code only has {cardinality}")]
    CountTooLarge { count: usize, cardinality: u64 },
    #[error("matrix is not orthogonal: residual {residual:e} exceeds {tolerance:e}")]
    NotOrthogonal { residual: f64, tolerance: f64 },
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),
    #[error("unsupported hash id {0}")]
    UnsupportedHashId(u8),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("corrupt matrix: {0}")]
    CorruptMatrix(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("template set is degenerate: {0}")]
    DegenerateSet(String),
    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {column}: {value:?} is not a number")]
    NonNumeric { row: usize, column: usize, value: String },
    #[error("row {row}: zero vector")]
    ZeroVectorRow { row: usize },
    #[error("malformed vector text: {0}")]
    VectorParse(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("contradictory configuration: {0}")]
    ConfigContradiction(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("alpha={0} is odd; the half-weight split needs an even weight")]
    OddWeight(usize),
    #[error("search space of {size} entries exceeds the capacity bound {bound}")]
    CapacityExceeded { size: String, bound: u64 },
    #[error("label {0:?} is already enrolled")]
    DuplicateLabel(String),
    #[error("label {0:?} is not enrolled")]
    UnknownLabel(String),
    #[error("invalid label {0:?}")]
    InvalidLabel(String),
    #[error("corrupt index: {0}")]
    CorruptIndex(String),
    #[error("I/O failure: {0}")]
    IoFailure(#[from] std::io::Error),
}

impl Error {
    /// Stable variant name, printed by the CLI alongside the message.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ZeroVector { .. } => "ZeroVector",
            Error::NotUnit { .. } => "NotUnit",
            Error::DimMismatch { .. } => "DimMismatch",
            Error::DimTooSmall(_) => "DimTooSmall",
            Error::InvalidParams { .. } => "InvalidParams",
            Error::InvalidCodeword(_) => "InvalidCodeword",
            Error::CountTooLarge { .. } => "CountTooLarge",
            Error::NotOrthogonal { .. } => "NotOrthogonal",
            Error::BadMagic => "BadMagic",
            Error::UnsupportedVersion(_) => "UnsupportedVersion",
            Error::UnsupportedHashId(_) => "UnsupportedHashId",
            Error::CorruptHeader(_) => "CorruptHeader",
            Error::CorruptMatrix(_) => "CorruptMatrix",
            Error::InvalidNoise(_) => "InvalidNoise",
            Error::DegenerateSet(_) => "DegenerateSet",
            Error::RaggedRows { .. } => "RaggedRows",
            Error::NonNumeric { .. } => "NonNumeric",
            Error::ZeroVectorRow { .. } => "ZeroVector",
            Error::VectorParse(_) => "VectorParse",
            Error::Csv(_) => "Csv",
            Error::InsufficientData(_) => "InsufficientData",
            Error::ConfigContradiction(_) => "ConfigContradiction",
            Error::InvalidThresholds(_) => "InvalidThresholds",
            Error::OddWeight(_) => "OddWeight",
            Error::CapacityExceeded { .. } => "CapacityExceeded",
            Error::DuplicateLabel(_) => "DuplicateLabel",
            Error::UnknownLabel(_) => "UnknownLabel",
            Error::InvalidLabel(_) => "InvalidLabel",
            Error::CorruptIndex(_) => "CorruptIndex",
            Error::IoFailure(_) => "IoFailure",
        }
    }
}
