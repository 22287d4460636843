use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("keypoint frame is marked invalid")]
    InvalidFrame,

    #[error("keypoint ({x}, {y}) lies outside the {width}x{height} image")]
    KeypointOutOfBounds { x: f64, y: f64, width: u32, height: u32 },

    #[error("monocular model domain error: {0}")]
    Domain(String),

    #[error("value {value} out of range: {reason}")]
    OutOfRange { value: f64, reason: String },

    #[error("insufficient history: need at least {needed} samples, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("timestamps must be strictly increasing (index {index}: {prev} -> {next})")]
    NonMonotoneTimestamp { index: usize, prev: f64, next: f64 },

    #[error("pixel ({x}, {y}) is outside the {width}x{height} depth image")]
    PixelOutOfBounds { x: i64, y: i64, width: u32, height: u32 },

    #[error("no valid depth pixels along the S-H line ({pixel_count} sampled)")]
    NoValidPixels { pixel_count: usize },

    #[error("depth frame: {0}")]
    DepthFrame(String),

    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),

    #[error("measurement must be positive, got {0}")]
    NonPositiveMeasurement(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no estimate/ground-truth pairs could be associated")]
    EmptyOverlap,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit status: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            _ => 1,
        }
    }
}
