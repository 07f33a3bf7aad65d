use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid point id {0}")]
    InvalidPoint(u32),
    #[error("empty configuration")]
    EmptyConfiguration,
    #[error("configuration has {got} servers, expected {expected}")]
    WrongConfigurationSize { got: usize, expected: usize },
    #[error("budget exceeded: need {needed}, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("profile length mismatch: {0} vs {1}")]
    LengthMismatch(u128, u128),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("approximate profile cannot be used for exact certificates")]
    ApproximateProfile,
    #[error("discretization too coarse: {0}")]
    TooCoarse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
