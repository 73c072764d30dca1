use thiserror::Error;

/// Errors raised by the symbolic and numeric layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degree condition violated: {0}")]
    Degree(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("result would be truncated: {0}")]
    Truncated(String),

    #[error("bad bracket letter {letter} (rank {rank})")]
    BadLetter { letter: usize, rank: usize },

    #[error("Hörmander condition fails at 0 within step {max_step}: span has dimension {achieved} of {n}")]
    Hormander {
        max_step: usize,
        achieved: usize,
        n: usize,
    },

    #[error("insufficient input order: have {have}, need {required}")]
    Order { have: u32, required: u32 },

    #[error("decomposition clause ({clause}) fails: {detail}")]
    Decomposition { clause: &'static str, detail: String },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("rank error: {0}")]
    Rank(String),

    #[error("basis mismatch")]
    BasisMismatch,

    #[error("structure error: {0}")]
    Structure(String),

    #[error("state escaped the bounding box at t = {t}")]
    Escape { t: f64 },

    #[error("window [{lo}, {hi}] exceeds control domain [{start}, {end}]")]
    Window { lo: f64, hi: f64, start: f64, end: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
