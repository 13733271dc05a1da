use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty design support")]
    EmptyDesignSupport,
    #[error("bin exceeds halfwidth (K = {k}, b = {b})")]
    BinExceedsHalfwidth { k: f64, b: f64 },
    #[error("no admissible split")]
    NoAdmissibleSplit,
    /// A validity gate of the two-stage procedure, e.g. `γ < 1−2ξ`.
    #[error("{0} violated")]
    Gate(String),
    #[error("flat curve at threshold")]
    FlatCurve,
    #[error("cusp required: m'(d0+) must be nonzero")]
    CuspRequired,
    #[error("degenerate limit: scaling constant is zero")]
    DegenerateLimit,
    #[error("{truncated} of {draws} extrema hit the simulation range ±{range}")]
    Truncation { truncated: usize, draws: usize, range: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("model/problem mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
