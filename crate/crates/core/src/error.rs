use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("signal must contain at least 2 samples, got {0}")]
    SignalTooShort(usize),

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("signal of length {len} supports at most {max_levels} decomposition levels, {requested} requested")]
    TooManyLevels {
        len: usize,
        requested: usize,
        max_levels: usize,
    },

    #[error("unsupported wavelet order {0}: Daubechies orders 2..=8 are available")]
    UnsupportedWaveletOrder(usize),

    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("invalid scale range {j1}..={j2}: {reason}")]
    InvalidScaleRange { j1: u32, j2: u32, reason: String },

    #[error("pyramids are not aligned: {0}")]
    Misaligned(String),

    #[error("not enough usable scales for a regression ({0} available, 2 required)")]
    InsufficientScales(usize),

    #[error("circulant embedding is not positive semi-definite (min eigenvalue {0:e})")]
    EmbeddingNotPsd(f64),

    #[error("time-change lookup collisions {fraction:.4} exceed 1%: increase oversampling (now {oversampling})")]
    OversamplingInsufficient { fraction: f64, oversampling: usize },

    #[error("no admissible analysis: {0}")]
    NoAdmissibleAnalysis(String),

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            constraint,
        }
    }
}
