use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),

    #[error("modulus {0} exceeds 2^31 - 1")]
    ModulusTooLarge(u64),

    #[error("index x[{0}] appears more than once")]
    DuplicateIndex(i64),

    #[error("rule has no terms")]
    EmptyRule,

    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("rule is not invertible: the unit-coefficient condition fails mod {primes:?}")]
    NotInvertible { primes: Vec<u64> },

    #[error("modulus {0} is not a prime power")]
    NotPrimePower(u64),

    #[error("prime factor index {index} out of range ({count} factors)")]
    FactorIndex { index: usize, count: usize },

    #[error("segment of length {len} is shorter than the rule span {span}")]
    SegmentTooShort { len: usize, span: usize },

    #[error("symbol {symbol} is out of range for modulus {modulus}")]
    SymbolOutOfRange { symbol: u64, modulus: u64 },

    #[error("angle {0} lies outside [0, pi]")]
    ThetaOutOfRange(f64),

    #[error("direction vector must be nonzero")]
    ZeroDirection,

    #[error("scale factor must be nonzero")]
    ZeroScale,

    #[error("invalid probability vector: {0}")]
    InvalidProbVector(String),

    #[error("invalid stochastic matrix: {0}")]
    NotStochastic(String),

    #[error("stationary solver did not converge (residual {0:e})")]
    NoConvergence(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("word must contain at least one symbol")]
    EmptyWord,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("exact enumeration needs {required} segments, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },

    #[error("invalid number {0:?}")]
    InvalidNumber(String),

    #[error("{0}")]
    InvalidArgument(String),
}
