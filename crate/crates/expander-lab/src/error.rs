//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by validation, discrete operators, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha out of range: alpha = {alpha}, admissible range is 0 < alpha <= k = {k}")]
    AlphaOutOfRange { alpha: f64, k: u32 },

    #[error("boundary function must be positive: min sampled phi = {min_phi}")]
    NonpositivePhi { min_phi: f64 },

    #[error("curvature order out of range: k = {k}, need 1 <= k <= n = {n}")]
    BadOrder { k: u32, n: u32 },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("dual field is not discretely convex: worst second difference {worst} at node {node}")]
    NonConvexInput { node: usize, worst: f64 },

    #[error("dual point lies outside the open unit ball: |xi| = {0}")]
    OutsideBall(f64),

    #[error("singular transformed Hessian at node {node}: eigenvalue {lambda} <= 0")]
    SingularHessian { node: usize, lambda: f64 },

    #[error("incomplete stencil at node {0}")]
    IncompleteStencil(usize),

    #[error("non-elliptic point at node {node}: lambda = ({l1}, {l2})")]
    NonEllipticPoint { node: usize, l1: f64, l2: f64 },

    #[error("potential must be negative, got u* = {0}")]
    NonnegativePotential(f64),

    #[error("Newton diverged at parameter {param}: {detail}")]
    NewtonDiverged { param: f64, detail: String },

    #[error("damping exhausted at parameter {param} (floor {floor})")]
    DampingExhausted { param: f64, floor: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolveFailed(String),

    #[error("a posteriori convexity check failed at node {node}: second difference {value}")]
    ConvexityLost { node: usize, value: f64 },

    #[error("extrapolation needs at least 3 fields, got {0}")]
    InsufficientData(usize),

    #[error("shooting bracket failed: mismatch has no sign change on [{lo}, {hi}]")]
    BracketFailed { lo: f64, hi: f64 },

    #[error("bad barrier constant: {0}")]
    BadConstant(String),

    #[error("no admissible rho in [1, 65536]: supersolution inequality fails at node {node} even at rho = 1 (margin {margin})")]
    NoAdmissibleRho { node: usize, margin: f64 },

    #[error("touching barrier fails to dominate at node {node}: deficit {deficit}; increase d")]
    DominanceFailed { node: usize, deficit: f64 },

    #[error("parse error at line {line}, column {col}: {msg}")]
    ParseError { line: usize, col: usize, msg: String },

    #[error("validation failed: {0}")]
    ValidationError(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
