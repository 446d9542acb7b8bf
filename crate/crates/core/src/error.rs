use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("exponent grid mismatch: den {0} vs {1}")]
    DenMismatch(u32, u32),
    #[error("level {from} does not divide {to}")]
    NotDivisible { from: u32, to: u32 },
    #[error("{t} is not a unit modulo {n}")]
    NotCoprime { t: i64, n: u32 },
    #[error("series has zero constant term")]
    ZeroConstant,
    #[error("non-integral coefficient at exponent {0}")]
    NonIntegral(u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("unknown identity {0:?}")]
    UnknownIdentity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
