use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is not supported (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("invalid dyadic range: k_min = {k_min} > k_max = {k_max}")]
    InvalidRange { k_min: i32, k_max: i32 },

    #[error("samples_per_octave must be at least 2, got {0}")]
    SamplesPerOctave(usize),

    #[error("dyadic range [{k_min}, {k_max}] cannot be resolved at {spo} samples per octave")]
    Resolution { k_min: i32, k_max: i32, spo: usize },

    #[error("grid would have {0} samples, above the supported limit")]
    GridTooLarge(usize),

    #[error("invalid axis: {0}")]
    InvalidAxis(String),

    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("non-finite sample value {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("empty k0 range")]
    EmptyK0Range,

    #[error("k0 range [{lo}, {hi}] is not inside the decomposition range [{k_min}, {k_max}]")]
    K0OutOfRange {
        lo: i32,
        hi: i32,
        k_min: i32,
        k_max: i32,
    },

    #[error("function has mass outside the dyadic decomposition ({count} samples)")]
    SupportOutsideDecomposition { count: usize },

    #[error("empty radius set")]
    EmptyRadiusSet,

    #[error("invalid radius {0}")]
    InvalidRadius(f64),

    #[error("invalid operator order: {0}")]
    InvalidOrder(String),

    #[error("empty cube family")]
    EmptyCubeFamily,

    #[error("cube centered at {center:?} with side {side} is not contained in the grid")]
    CubeOutsideGrid { center: Vec<f64>, side: f64 },

    #[error("probe point {point:?} lies in the excluded zone 2^(j-2) < |x| < 2^(j+1) for j = {j}")]
    ProbeInExcludedZone { point: Vec<f64>, j: i32 },

    #[error("function is not supported in the annulus A_{0}")]
    NotSupportedInAnnulus(i32),

    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("clause `{0}` is not affine in the chosen free axes")]
    NonAffineClause(String),

    #[error("operator {operator} cannot be paired with theorem {theorem}")]
    OperatorTheoremMismatch { operator: String, theorem: String },

    #[error("operator order is inconsistent with the exponent coupling: {0}")]
    CouplingMismatch(String),

    #[error("probe parameters must fail exactly one clause: {0}")]
    InvalidProbe(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
