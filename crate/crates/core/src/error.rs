//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma = {gamma} is outside the admissible range (0, {limit}) for n = {n}")]
    GammaOutOfRange { gamma: f64, n: u32, limit: f64 },

    #[error("gamma = {gamma} is an integer; the operator family is defined away from integer orders")]
    GammaInteger { gamma: f64 },

    #[error("boundary dimension must be a positive integer")]
    ZeroDimension,

    #[error("gamma must be non-negative, got {gamma}")]
    NegativeGamma { gamma: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("grid dimension {dims} unsupported (expected 1..=3)")]
    UnsupportedDimension { dims: usize },

    #[error("grid sizes must be powers of two, got {size}")]
    SizeNotPowerOfTwo { size: usize },

    #[error("period lengths must be positive")]
    NonPositivePeriod,

    #[error("grid values must all be finite")]
    NonFiniteValue,

    #[error("singular-integral path requires gamma in (0,1), got {gamma}")]
    SingularGammaRange { gamma: f64 },

    #[error("image_radius must be at least 1")]
    ImageRadiusTooSmall,

    #[error("invalid graded mesh: {0}")]
    InvalidMesh(String),

    #[error("tridiagonal system is singular (pivot {pivot:.3e} at row {row}); check mesh grading")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("weight exponent a = {a} outside (-1, 1); use the iterated extraction for m >= 1")]
    WeightOutOfRange { a: f64 },

    #[error("iterated extraction requires m >= 1; use dtn_extract for gamma in (0,1)")]
    IteratedOnDirect,

    #[error("boundary-layer fit is ill-conditioned (condition estimate {cond:.3e}); mesh too coarse near y = 0")]
    IllConditionedFit { cond: f64 },

    #[error("Richardson pair did not converge: estimates {first:.6e} and {second:.6e} disagree beyond tolerance")]
    NonConvergentFit { first: f64, second: f64 },

    #[error("fit-noise amplification beyond tolerance: relative spread {spread:.3e} > {tol:.3e}")]
    NoiseAmplified { spread: f64, tol: f64 },

    #[error("mode profiles use different meshes")]
    MeshMismatch,

    #[error("series has zero leading coefficient; reciprocal/power require a nonzero constant term")]
    SeriesLeadingZero,

    #[error("series truncation order {trunc} cannot represent the requested operation")]
    TruncationUnderflow { trunc: f64 },

    #[error("series is not a defining function (leading term must be y with unit coefficient)")]
    NotDefiningFunction,

    #[error("expansion block has odd low-order terms; violates the even-type hypothesis")]
    OddLowOrderTerms,

    #[error("companion series must have constant term 1, got {got}")]
    CompanionDatum { got: f64 },

    #[error("curved direct formula requires gamma in (0,1); use the iterated variant")]
    CurvedGammaRange { gamma: f64 },

    #[error("constant-scalar model not solvable: residual {residual:.3e} at order {order} is insensitive to the free coefficient")]
    ModelNotSolvable { order: i32, residual: f64 },

    #[error("boundary datum support extends too close to the box edge")]
    SupportTooWide,

    #[error("configuration invalid:\n{}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"))]
    Config(Vec<crate::config::ConfigViolation>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("corrupt file: {0}")]
    CorruptFile(String),
}
