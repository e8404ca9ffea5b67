use thiserror::Error;

/// Errors raised by constructions and checks in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("order mismatch: {0}")]
    OrderMismatch(String),
    #[error("the (0,0) curve is not a link")]
    UndefinedLink,
    #[error("dimension {0} is even; only odd n is supported")]
    EvenLevel(i64),
    #[error("lift is not degenerate: {0}")]
    NotDegenerate(String),
    #[error("dimension {0} is too small")]
    TooSmall(i64),
    #[error("inconsistent weight system: {0}")]
    InvalidWeightSystem(String),
    #[error("character is not invariant: {0}")]
    NotInvariant(String),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("b = {b} is not coprime to n = {n}")]
    NotCoprime { b: i64, n: i64 },
    #[error("mapping class is not periodic")]
    NotPeriodic,
    #[error("classical shadow failure: {0}")]
    ShadowFailure(String),
    #[error("matrix [[{0},{1}],[{2},{3}]] is not in SL(2,Z)")]
    NotSl2z(i64, i64, i64, i64),
    #[error("ring order {0} exceeds the exact-mode cap")]
    RingTooLarge(u64),
    #[error("relation check failed: {0}")]
    RelationFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OrderMismatch(_) => "OrderMismatch",
            Error::UndefinedLink => "UndefinedLink",
            Error::EvenLevel(_) => "EvenLevel",
            Error::NotDegenerate(_) => "NotDegenerate",
            Error::TooSmall(_) => "TooSmall",
            Error::InvalidWeightSystem(_) => "InvalidWeightSystem",
            Error::NotInvariant(_) => "NotInvariant",
            Error::TooLarge(_) => "TooLarge",
            Error::NotCoprime { .. } => "NotCoprime",
            Error::NotPeriodic => "NotPeriodic",
            Error::ShadowFailure(_) => "ShadowFailure",
            Error::NotSl2z(..) => "NotSl2z",
            Error::RingTooLarge(_) => "RingTooLarge",
            Error::RelationFailed(_) => "RelationFailed",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
