use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("fields are sampled on different grids")]
    GridMismatch,
    #[error("expected a {expected}D field, got {got}D")]
    Dimension { expected: usize, got: usize },
    #[error("field contains a non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("field has zero norm")]
    ZeroField,
    #[error("value count {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("plane mismatch: expected {expected:?} plane, got {got:?}")]
    PlaneMismatch {
        expected: crate::field::Plane,
        got: crate::field::Plane,
    },
    #[error("output grid aliases the input band: {fraction:.3e} of the energy sits in the outermost samples")]
    Aliasing { fraction: f64 },
    #[error("object geometry does not fit the grid: {0}")]
    GeometryExceedsGrid(String),
    #[error("not a binary mask object: {0}")]
    NotBinaryMask(&'static str),
    #[error("spectral wrap-around energy {fraction:.3e} exceeds the allowed limit")]
    WrapAround { fraction: f64 },
    #[error("finite-difference scheme unstable: energy grew by {growth:.3e} at step {step}")]
    Unstable { step: usize, growth: f64 },
    #[error("field is not real-valued (imaginary/max = {ratio:.3e})")]
    NotReal { ratio: f64 },
    #[error("times must be non-negative and strictly increasing")]
    BadTimes,
    #[error("point ({x:.6e}, {y:.6e}) lies outside the grid")]
    PointOutsideGrid { x: f64, y: f64 },
    #[error("empty search window")]
    EmptyWindow,
    #[error("pgm: {0}")]
    Pgm(String),
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {v}"),
        })
    }
}
