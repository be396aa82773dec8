use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside domain: {0}")]
    DomainViolation(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical overflow in {0}")]
    NumericalOverflow(String),

    #[error("domain is unbounded: {0}")]
    UnboundedDomain(String),

    #[error("problem has no exact duality-gap oracle")]
    NoGapOracle,

    #[error("problem has no growth specification; restarts require one")]
    GrowthSpecMissing,

    #[error("invalid configuration: {0}")]
    ConfigError(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("series shorter than the requested window")]
    SeriesTooShort,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
