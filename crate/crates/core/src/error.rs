//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("points_per_axis must be even and >= 8, got {0}")]
    BadPointCount(usize),
    #[error("half_width must be positive, got {0}")]
    BadHalfWidth(f64),
    #[error("dim must be 1 or 2, got {0}")]
    UnsupportedDim(usize),
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("support escapes the truncation cube: |value| = {magnitude:.3e} would land outside [-L, L]^n at node {node}")]
    SupportEscape { node: usize, magnitude: f64 },
    #[error("input not supported inside {radius:.3} (0.8 L): |u| = {magnitude:.3e} at x = {x:?}")]
    SupportGuard {
        radius: f64,
        x: Vec<f64>,
        magnitude: f64,
    },
    #[error("exponent out of (1, inf) at node {node}: p = {value}")]
    ExponentOutOfRange { node: usize, value: f64 },
    #[error("infeasible M* decomposition at node {node} (x = {x:?}): 1/p1 = {reciprocal:.6} not in (0, 1)")]
    InfeasibleDecomposition {
        node: usize,
        x: Vec<f64>,
        reciprocal: f64,
    },
    #[error("parameters must satisfy 0 < beta < alpha, got alpha = {alpha}, beta = {beta}")]
    BadOscillationParams { alpha: f64, beta: f64 },
    #[error("dominance |f| <= |g| violated at {count} node(s), first at node {first}")]
    DominanceViolated { count: usize, first: usize },
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },
    #[error("bisection failed to bracket/converge after {iterations} iterations")]
    BisectionFailed { iterations: usize },
    #[error("cube [{lo:?}, {hi:?}] leaves the grid index range")]
    CubeOutOfDomain { lo: Vec<usize>, hi: Vec<usize> },
    #[error("constant function rejected: sharp maximal vanishes identically")]
    ConstantFunction,
    #[error("derivative order ({alpha}, {beta}) exceeds order cap {cap}")]
    DerivativeUnavailable { alpha: u32, beta: u32, cap: u32 },
    #[error("symbol not elliptic on |x|+|xi| >= {radius:.3}: |a| = {min_abs:.3e} at x = {x:?}, xi = {xi:?}")]
    EllipticityViolation {
        radius: f64,
        min_abs: f64,
        x: Vec<f64>,
        xi: Vec<f64>,
    },
    #[error("dilation factor must be positive and finite, got {0}")]
    BadDilation(f64),
    #[error("translation {requested:.6} is not a lattice vector (spacing {spacing:.6})")]
    OffLatticeTranslation { requested: f64, spacing: f64 },
    #[error("unknown name `{name}` for {what}")]
    UnknownName { what: &'static str, name: String },
    #[error("operation needs an analytic closure, but the {what} holds raw samples only")]
    ClosureUnavailable { what: &'static str },
}
