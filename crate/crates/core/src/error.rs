use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The Delaunay chart degenerates (circular, horizontal or rectilinear orbit).
    #[error("chart singular: {0}")]
    ChartSingular(String),
    /// Excluded degenerate configuration (C = 0, C = G2, collisions).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    /// A numerical procedure could not reach its accuracy target.
    #[error("precision error: {0}")]
    Precision(String),
    /// An iterative solver did not converge.
    #[error("solver error: {0}")]
    Solver(String),
    /// Internal results contradict each other (e.g. a misclassified region).
    #[error("consistency error: {0}")]
    Consistency(String),
    /// Curve tracing or period extraction failed.
    #[error("tracing error: {0}")]
    Tracing(String),
    /// Level too close to a separatrix to be traced reliably.
    #[error("separatrix proximity: {0}")]
    SeparatrixProximity(String),
}

impl Error {
    /// Precision-type failures (the CLI maps them to exit code 2).
    pub fn is_precision(&self) -> bool {
        matches!(self, Error::Precision(_) | Error::Solver(_))
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
