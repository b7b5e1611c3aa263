use thiserror::Error;

/// Crate-wide error type. Each variant carries a stable machine-readable
/// code (see [`Error::code`]) so callers can dispatch without string
/// matching on messages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid dropout schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// No contiguous window of the curve fits a power law at the requested
    /// quality threshold.
    #[error("no power-law region: {0}")]
    NoPowerRegion(String),

    #[error("no intersection: {0}")]
    NoIntersection(String),

    /// Two curves share no compute interval, so they cannot be compared.
    #[error("disjoint spans: {0}")]
    DisjointSpans(String),

    #[error("no overlap: {0}")]
    NoOverlap(String),

    #[error("degenerate bounds: {0}")]
    DegenerateBounds(String),

    /// A reference loss is below everything the other curve achieves.
    #[error("loss {target} is never reached (closest approach {gap} above it)")]
    UnreachableLoss { target: f64, gap: f64 },
}

impl Error {
    /// Stable identifier for the error class, independent of message text.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidCurve(_) => "invalid_curve",
            Error::InvalidSchedule(_) => "invalid_schedule",
            Error::InvalidInput(_) => "invalid_input",
            Error::InsufficientData(_) => "insufficient_data",
            Error::NoPowerRegion(_) => "no_power_region",
            Error::NoIntersection(_) => "no_intersection",
            Error::DisjointSpans(_) => "disjoint_spans",
            Error::NoOverlap(_) => "no_overlap",
            Error::DegenerateBounds(_) => "degenerate_bounds",
            Error::UnreachableLoss { .. } => "unreachable_loss",
        }
    }

    /// True for errors that describe malformed input rather than an
    /// analysis that ran and failed.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidCurve(_)
                | Error::InvalidSchedule(_)
                | Error::InvalidInput(_)
                | Error::InsufficientData(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
