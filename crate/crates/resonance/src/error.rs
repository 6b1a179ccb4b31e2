use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature tolerance not met (estimate {value}, error {error:e})")]
    ToleranceNotMet { value: Complex64, error: f64 },
    #[error("integrand is not finite at parameter {at}")]
    NonFinite { at: f64 },
    #[error("integral over the half line does not converge")]
    Divergent,
    #[error("tolerances must be positive and at least one subdivision allowed")]
    InvalidSettings,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no convergence after {iterations} iterations (last iterate {last}, residual {residual:e})")]
    NoConvergence { last: Complex64, residual: f64, iterations: usize },
    #[error("derivative vanished at {at} and the secant fallback failed")]
    SingularDerivative { at: Complex64 },
    #[error("function evaluation failed: {0}")]
    Evaluation(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("a path needs at least two vertices")]
    TooFewVertices,
    #[error("consecutive vertices {0} coincide")]
    RepeatedVertex(usize),
    #[error("non-finite vertex")]
    NonFinite,
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("segment {0} runs along the ray; perturb the anchor")]
    Collinear(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("mu = 0 is served by the germ formulas, not by f")]
    MuZero,
    #[error("z = {0} lies on the cut of the requested sheet")]
    OnCut(Complex64),
    #[error("z = {0} is a pole or branch point of f")]
    Singular(Complex64),
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    #[error("mu = {mu} is above mu_c = {mu_c}; the state is a resonance")]
    AboveCritical { mu: f64, mu_c: f64 },
    #[error("z = {z} is outside the validity region of branch {branch}")]
    BranchRegion { z: Complex64, branch: &'static str },
    #[error("derivative of f vanishes at the branch point {0}")]
    ResidueDerivative(Complex64),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("continuation lost near mu = {mu} (last z = {z})")]
    Lost { mu: f64, z: Complex64 },
    #[error("seed at mu = {mu} did not converge: {source}")]
    Seed { mu: f64, source: RootError },
    #[error("zero came within {distance:e} of the singular point {point}")]
    PoleApproach { point: Complex64, distance: f64 },
    #[error("grid must be strictly increasing and non-negative")]
    BadGrid,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThreeLevelError {
    #[error("overlap Gram matrix is not positive semidefinite (min eigenvalue {0:e})")]
    GramNotPsd(f64),
    #[error("the three coupling modes are collinear")]
    Collinear,
    #[error("operation requires f01 != f12")]
    Degenerate,
    #[error("denominator vanishes: {0}")]
    DegenerateDenominator(&'static str),
    #[error("basis size {0} exceeds the cap {1}")]
    DimensionOverflow(usize, usize),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),
    #[error("truncation N = {n} is too small, need at least {need}")]
    TruncationInsufficient { n: usize, need: usize },
    #[error("result moved by {delta:e} between truncations {n} and {}", n + 1)]
    TruncationUnstable { n: usize, delta: f64 },
    #[error("pseudo-resolvent is ill conditioned: gap {0:e}")]
    IllConditioned(f64),
    #[error("root isolation failed near {0}")]
    RootIsolation(Complex64),
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
}
