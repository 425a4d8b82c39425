use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator must be positive, got {0}")]
    NonPositiveDenominator(i64),

    #[error("cannot parse rational {0:?} (expected q/p)")]
    ParseRational(String),

    #[error("cannot parse pair {0:?} (expected q1/p1 v q2/p2)")]
    ParsePair(String),

    #[error("{a} and {b} are not Farey neighbors (determinant {determinant})")]
    NotFareyNeighbors {
        a: String,
        b: String,
        determinant: u64,
    },

    #[error("mediant of {0} with itself is undefined")]
    EqualRationals(String),

    #[error("weights n and m cannot both be zero")]
    ZeroWeights,

    #[error("integer overflow in rational arithmetic")]
    Overflow,

    #[error("{target} is not strictly between {lo} and {hi}")]
    TargetOutsideInterval {
        target: String,
        lo: String,
        hi: String,
    },

    #[error("depth {0} exceeds the limit of {1}")]
    DepthTooLarge(u32, u32),

    #[error("cycle length {0} exceeds the limit of {1}")]
    LengthTooLarge(usize, usize),

    #[error("symbolic word is not an allowed cycle: {0}")]
    NotAllowedCycle(String),

    #[error("invalid map parameters: {0}")]
    InvalidParams(String),

    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
