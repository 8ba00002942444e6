use thiserror::Error;

/// Errors raised by flux construction, transforms, solvers and checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least {min} knots, got {got}")]
    TooFewKnots { min: usize, got: usize },
    #[error("knot and value lists differ in length ({knots} vs {values})")]
    LengthMismatch { knots: usize, values: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("knots are not uniformly spaced (gap {index} deviates)")]
    NonUniformGrid { index: usize },
    #[error("samples are not convex: second difference {second_difference:e} at knot {index}")]
    NonConvexSamples { index: usize, second_difference: f64 },
    #[error("{side} tail does not join with nondecreasing slope (tail {tail_slope}, segment {segment_slope})")]
    TailMismatch { side: &'static str, tail_slope: f64, segment_slope: f64 },
    #[error("flux is not differentiable at anchor {at}: one-sided slopes {left} and {right}")]
    NotDifferentiableAtAnchor { at: f64, left: f64, right: f64 },
    #[error("anchor {at} does not coincide with a flux knot")]
    AnchorNotOnGrid { at: f64 },
    #[error("invalid anchors: A = {a} must be below B = {b}")]
    InvalidAnchors { a: f64, b: f64 },
    #[error("mollifier epsilon {0} outside (0, 1]")]
    InvalidEpsilon(f64),
    #[error("kernel quadrature too coarse: {samples} samples, need at least {required}")]
    KernelQuadratureTooCoarse { samples: usize, required: usize },
    #[error("growth limits violate mu- <= 0 <= mu+ (mu- = {mu_minus}, mu+ = {mu_plus})")]
    GrowthSignViolation { mu_minus: f64, mu_plus: f64 },
    #[error("flux is not superlinear on the {side} side, its conjugate is unbounded")]
    UnboundedConjugate { side: &'static str },
    #[error("invalid dual grid: q_min = {q_min}, q_max = {q_max}, n_q = {n_q}")]
    InvalidDualGrid { q_min: f64, q_max: f64, n_q: usize },
    #[error("no search window: conjugate does not dominate {slope}|q| on the dual grid or its tails")]
    WindowNotFound { slope: f64 },
    #[error("time must be positive, got {0}")]
    InvalidTime(f64),
    #[error("times must satisfy 0 <= s < t, got s = {s}, t = {t}")]
    InvalidTimes { s: f64, t: f64 },
    #[error("index {index} out of range for {len} knots")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("ladder levels {n} -> {m}: increment {increment:e} exceeds bound {bound:e}")]
    NotCauchy { n: usize, m: usize, increment: f64, bound: f64 },
    #[error("truncation ladder not monotone between levels {n} and {m}: excess {excess:e} at x = {x}, t = {t}")]
    NotMonotone { n: usize, m: usize, excess: f64, x: f64, t: f64 },
    #[error("invalid CFL number {0}, must lie in (0, 1)")]
    CflViolation(f64),
    #[error("solutions share no output time")]
    NoCommonTimes,
    #[error("integration window [{lo}, {hi}] exceeds the grid [{grid_lo}, {grid_hi}]")]
    WindowExceedsGrid { lo: f64, hi: f64, grid_lo: f64, grid_hi: f64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("test function support leaves the computed window: {0}")]
    SupportOutsideWindow(String),
    #[error("initial trace check needs at least three positive times, got {0}")]
    MissingTraceTimes(usize),
    #[error("data support touches the grid boundary")]
    SupportTouchesBoundary,
    #[error("grids are incompatible: {0}")]
    GridMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
