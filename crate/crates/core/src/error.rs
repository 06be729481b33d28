use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length error: {0}")]
    Length(String),
    #[error("position {position} is beyond the horizon {horizon}")]
    Horizon { position: u64, horizon: u64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("alphabet error: {0}")]
    Alphabet(String),
    #[error("parity error: block length {0} must be even")]
    Parity(usize),
    #[error("index {index} out of range 1..={max}")]
    IndexRange { index: u128, max: u128 },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("data quality: {0}")]
    DataQuality(String),
    #[error("malformed sequence file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
