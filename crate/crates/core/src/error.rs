use crate::raster::RasterShape;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid raster shape {height}x{width}: both dimensions must be at least 1")]
    InvalidShape { height: usize, width: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch {
        expected: RasterShape,
        found: RasterShape,
    },

    #[error("data length {found} does not match raster size {expected}")]
    DataLength { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("label map has no instances")]
    NoInstances,

    #[error("no center regions available for {0} foreground pixels")]
    NoCenterRegions(usize),

    #[error("instance label {0} has no centroid")]
    MissingCentroid(u32),

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("could not place nucleus {index} after {attempts} attempts")]
    PlacementFailed { index: usize, attempts: usize },

    #[error("bad magic bytes, not a CVRAST01 raster")]
    BadMagic,

    #[error("truncated raster file: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("unsupported raster header: {0}")]
    UnsupportedHeader(String),

    #[error("raster type mismatch: expected {expected}, file holds {found}")]
    TypeMismatch { expected: String, found: String },

    #[error("label {0} exceeds the u16 range of the raster format")]
    LabelOverflow(u32),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
