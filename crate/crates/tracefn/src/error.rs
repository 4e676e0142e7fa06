//! Crate-wide error type.
//!
//! Domain errors (bad mathematical input) are kept separate from I/O and
//! configuration errors so the CLI can map them to distinct exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotPrime(u64),

    #[error("character order {order} does not divide p - 1 = {pm1}")]
    InvalidCharacterOrder { order: u64, pm1: u64 },

    #[error("discrete logarithm of zero is undefined")]
    DlogOfZero,

    #[error("operands live in different prime fields (p = {0} vs p = {1})")]
    FieldMismatch(u64, u64),

    #[error("hyper-Kloosterman rank must be at least 2, got {0}")]
    KloostermanRank(u32),

    #[error("rational map has identically zero denominator")]
    DegenerateMap,

    #[error("kernel contains an additive-character component; its Fourier transform is not a bounded trace function")]
    NonFourierKernel,

    #[error("matrix [[{0}, {1}], [{2}, {3}]] is singular mod p")]
    SingularMatrix(u64, u64, u64, u64),

    #[error("scan threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),

    #[error("modulus must be positive, got {0}")]
    InvalidModulus(i64),

    #[error("argument d = {d} is not a unit mod c = {c}")]
    NotAUnit { d: i64, c: i64 },

    #[error("{0} is not a valid quadratic field discriminant datum (need squarefree, != 0, 1)")]
    BadFieldDatum(i64),

    #[error("scaling parameter must be positive, got {0}")]
    InvalidRadius(f64),

    #[error("unknown test-function profile '{0}'")]
    UnknownProfile(String),

    #[error("element is zero where a nonzero field element is required")]
    ZeroElement,

    #[error("{0} does not lie in the required ideal power")]
    NotInIdeal(String),

    #[error("coefficient table extends to n = {have} but n = {need} is required; extend the table first")]
    InsufficientExtent { have: usize, need: usize },

    #[error("coefficient table size {0} exceeds the exact-arithmetic safety cap {1}")]
    ExtentTooLarge(usize, usize),

    #[error("{0} is not prime")]
    ExpectedPrime(u64),

    #[error("exponent fit needs at least {need} usable primes, got {got}")]
    DegenerateFit { need: usize, got: usize },

    #[error("invalid kernel spec: {0}")]
    KernelSpec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cache file is corrupt or has an unsupported header: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code the CLI maps this error to: 1 for domain errors, 2 for
    /// I/O and configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Config(_) | Error::CacheFormat(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
