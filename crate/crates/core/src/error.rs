use thiserror::Error;

/// Errors raised by space construction, grid functions and the verification batteries.
#[derive(Debug, Error)]
pub enum Error {
    #[error("space must have dimension at least 1")]
    ZeroDimension,
    #[error("pairing matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("pairing matrix is not symmetric (max |M - M^T| = {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid norm: {0}")]
    InvalidNorm(String),
    #[error("analytic probe requires a Euclidean or quadratic norm; use a sampled probe")]
    UnsupportedProbe,
    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid has {points} points, over the budget of {budget}")]
    BudgetExceeded { points: usize, budget: usize },
    #[error("grids do not match")]
    GridMismatch,

    #[error("function is +inf at every grid point")]
    Improper,
    #[error("function takes a -inf or NaN value")]
    InvalidValue,
    #[error("function is not convex along grid lines (midpoint violation {violation:e} at {at:?})")]
    NotConvex { violation: f64, at: Vec<f64> },
    #[error("conjugate is +inf on the whole dual grid; no affine minorant")]
    NoAffineMinorant,
    #[error("h must be finite on the whole grid")]
    HNotFinite,

    #[error("point set is empty")]
    EmptySet,
    #[error("point set contains duplicate points at index {0} and {1}")]
    DuplicatePoint(usize, usize),
    #[error("set is not monotone: <x - y, x* - y*> = {value:e} for pair {first:?}, {second:?}")]
    NotMonotone { value: f64, first: Vec<f64>, second: Vec<f64> },
    #[error("f drops below q by {gap:e} at {at:?}")]
    FBelowQ { gap: f64, at: Vec<f64> },
    #[error("function failed the grid VZ check (worst residual {residual:e})")]
    NotVz { residual: f64 },
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(f64),
    #[error("projection step {step}: best grid value {achieved:e} exceeds certificate {required:e}")]
    StepInfeasible { step: usize, achieved: f64, required: f64 },
    #[error("start point is outside the effective domain of f")]
    OutsideDomain,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("h leaves the Fitzpatrick sandwich by {residual:e} at {at:?}")]
    BracketViolated { residual: f64, at: Vec<f64> },
    #[error("h exceeds q by {excess:e} at set point {at:?}")]
    NotAMinorant { excess: f64, at: Vec<f64> },

    #[error("pairing matrix is singular; no dual pairing is constructed")]
    SingularPairing,
    #[error("no Banach SSD dual: p~({witness:?}) = {value}")]
    NoDual { witness: Vec<f64>, value: f64 },
    #[error("p~-density of the pairing image was not verified")]
    DensityNotVerified,
    #[error("(x, x*) lies on the set; alignment ratios are undefined")]
    OnSetDegenerate,

    #[error("missing artifacts: {0}")]
    MissingArtifacts(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
