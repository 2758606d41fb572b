use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported characteristic {0}: need a prime p with 3 < p < 2^16")]
    UnsupportedCharacteristic(u64),
    #[error("field of order {p}^{k} does not fit in 64-bit arithmetic")]
    FieldTooLarge { p: u64, k: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not a square")]
    NotASquare,
    #[error("cannot embed a degree-{from} field into a degree-{to} field")]
    DegreeMismatch { from: u32, to: u32 },
    #[error("fields have different characteristics")]
    CharacteristicMismatch,
    #[error("singular curve: discriminant vanishes")]
    SingularCurve,
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: String,
        needed: u128,
        budget: u128,
    },
    #[error("level {0} is not a supported prime (need a prime <= 13)")]
    UnsupportedLevel(u32),
    #[error("level {0} equals the characteristic; use the mod-p character instead")]
    LevelIsCharacteristic(u32),
    #[error("trace {trace}, det {det} mod {ell}: repeated eigenvalue needs a scalar flag")]
    AmbiguousClass { ell: u32, trace: u32, det: u32 },
    #[error("determinant {0} is not a unit")]
    SingularDeterminant(u32),
    #[error("no Frobenius records")]
    EmptyRecords,
    #[error("local density equals 1 at degree {0}")]
    OmegaIsOne(u32),
    #[error("no census available for degree {0}")]
    MissingCensus(u32),
    #[error("sieve certificate violated at prime {prime}: {image} residues > allowed {allowed}")]
    CertificateViolation {
        prime: String,
        image: u64,
        allowed: f64,
    },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn budget(what: impl Into<String>, needed: u128, budget: u128) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            needed,
            budget,
        }
    }
}
