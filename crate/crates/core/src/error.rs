use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({x}, {y}) is not within one identification translate of the polygon")]
    PointOutsideAtlas { x: f64, y: f64 },

    #[error("straight continuation meets a cone point near ({x}, {y})")]
    ConePointHit { x: f64, y: f64 },

    #[error("degenerate crossing near ({x}, {y})")]
    DegenerateCrossing { x: f64, y: f64 },

    #[error("path-system leg is degenerate at ({x}, {y})")]
    DegenerateLeg { x: f64, y: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("intersection pairing is singular")]
    SingularPairing,

    #[error("unsupported surface `{0}`")]
    UnsupportedSurface(String),

    #[error("unknown curve or cylinder `{0}`")]
    UnknownCurve(String),

    #[error("{resamples} of {samples} samples were degenerate, above the 0.1% budget")]
    ExcessiveDegeneracy { resamples: usize, samples: usize },

    #[error("expected {expected} profiles (one per basis cylinder), got {got}")]
    ProfileCountMismatch { expected: usize, got: usize },

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("invalid twist profile: {0}")]
    InvalidProfile(String),

    #[error("invalid curve system: {0}")]
    InvalidCurveSystem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Measure-zero events that a sampler handles by drawing another point.
    pub fn is_resampleable(&self) -> bool {
        matches!(
            self,
            Error::ConePointHit { .. } | Error::DegenerateCrossing { .. } | Error::DegenerateLeg { .. }
        )
    }
}
