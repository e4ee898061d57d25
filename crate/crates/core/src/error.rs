use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("CW ratio not a power of two: cw_max {cw_max} / cw_min {cw_min}")]
    CwRatioNotPowerOfTwo { cw_min: u32, cw_max: u32 },

    #[error("cw_min must be at least 2, got {0}")]
    CwMinTooSmall(u32),

    #[error("cw_max {cw_max} is below cw_min {cw_min}")]
    CwMaxBelowMin { cw_min: u32, cw_max: u32 },

    #[error("at least 2 nodes (AP plus one STA) required, got {0}")]
    TooFewNodes(usize),

    #[error("symmetry out of range (0, 1]: {0}")]
    SymmetryOutOfRange(f64),

    #[error("negative power for {component}: {value} W")]
    NegativePower { component: &'static str, value: f64 },

    #[error("{field} must be a positive duration, got {value} us")]
    NonPositiveDuration { field: &'static str, value: f64 },

    #[error("{field} must be a positive bit-rate, got {value} b/s")]
    NonPositiveRate { field: &'static str, value: f64 },

    #[error("downlink load {downlink} B must equal the maximum MPDU size {mpdu_max} B")]
    DownlinkNotMpduMax { downlink: u32, mpdu_max: u32 },

    #[error("line {line}: unknown configuration key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: expected `key = value`")]
    MalformedLine { line: usize },

    #[error("line {line}: key `{key}` given more than once")]
    DuplicateKey { line: usize, key: String },

    #[error("line {line}: invalid value `{value}` for `{key}`")]
    InvalidValue { line: usize, key: String, value: String },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error("replication needs at least 2 seeds, got {0}")]
    TooFewSeeds(usize),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("comparison key mismatch: {0}")]
    KeyMismatch(String),

    #[error("malformed CSV: {0}")]
    MalformedCsv(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
