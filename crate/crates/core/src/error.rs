use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{num}/2^{depth} lies outside [0, 1]")]
    OutOfUnitInterval { num: String, depth: u32 },

    #[error("value 1 codes the infinite string 0.111..., not a finite natural")]
    InfinitePoint,

    #[error("width {width} is smaller than canonical depth {depth}")]
    WidthTooSmall { width: u32, depth: u32 },

    #[error("difference quotient has a zero denominator")]
    ZeroDenominator,

    #[error("{0} is outside the odd branch [1/2, 1)")]
    NotOddBranch(String),

    #[error("q must be odd and at least 3, got {0}")]
    InvalidQ(u32),

    #[error("depth {depth} outside supported range {min}..={max}")]
    DepthOutOfRange { depth: u32, min: u32, max: u32 },

    #[error("index {index} does not fit depth {depth}")]
    IndexOutOfRange { index: u64, depth: u32 },

    #[error("invalid interval label {0:?}")]
    BadLabel(String),

    #[error("sample depth {sample_depth} must exceed interval depth {depth}")]
    SampleDepthTooSmall { sample_depth: u32, depth: u32 },

    #[error("empty window [{lo}, {hi})")]
    EmptyWindow { lo: String, hi: String },

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
