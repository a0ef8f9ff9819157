//! Dirichlet problems on bounded domains for mixed-order nonlocal
//! operators.
//!
//! The exterior condition `u = 0` outside Ω is imposed by masking inside a
//! padded periodic box: Ω must keep a quarter of the box length away from
//! the boundary, and every field entering a form vanishes identically
//! outside Ω. On that subspace the crate provides the restricted quadratic
//! form, its lowest eigenpairs, Poincaré lower bounds with the explicit
//! constants, a conjugate-gradient linear solver, a Nehari-based mountain
//! pass solver for subcritical powers, and a best-effort critical-point
//! search for jumping nonlinearities with a level report.

pub mod bounds;
pub mod domain;
pub mod eigen;
pub mod jumping;
pub mod mountain;
pub mod operator;

pub use bounds::{block_index, generalized_poincare_floor, poincare_constant};
pub use domain::DomainMask;
pub use eigen::{eigenpairs, SpectrumResult};
pub use jumping::{
    jumping_functional, jumping_solve, JumpingOutcome, LevelReport,
};
pub use mountain::{
    solve_mountain_pass, weak_equation_residual, MountainPassCertificate, MountainPassSolution,
};
pub use operator::{form_apply, linear_solve, SolveResult};

use fraclab_spectral::GridMeta;

#[derive(Debug, thiserror::Error)]
pub enum DirichletError {
    #[error("domain contains no grid node")]
    EmptyDomain,
    #[error("domain reaches within {clearance} of the periodic boundary, need {required}")]
    DomainTooWide { clearance: f64, required: f64 },
    #[error("grid {0} does not match domain grid {1}")]
    GridMismatch(GridMeta, GridMeta),
    #[error("field is nonzero outside the domain (node {index})")]
    OutsideSupport { index: usize },
    #[error(
        "superposition multiplier attains {min_value:.3e} < 0: the form is indefinite, \
         the negative-order weight is too large for this family"
    )]
    IndefiniteForm { min_value: f64 },
    #[error("order measure fails the structural assumptions: {0}")]
    Assumptions(String),
    #[error("exponent q = {q} outside the admissible range (2, {critical})")]
    BadExponent { q: f64, critical: f64 },
    #[error("({a}, {b}) lies outside the window ({lo}, {hi})^2")]
    WindowViolation { a: f64, b: f64, lo: f64, hi: f64 },
    #[error("seed field is zero on the domain; the fiber scaling is undefined at 0")]
    ZeroSeed,
    #[error("requested {k} pairs but the masked subspace has dimension {dim}")]
    TooManyPairs { k: usize, dim: usize },
    #[error("iteration stalled after {iterations} steps, best residual {best_residual:.3e}")]
    NonConvergence { best_residual: f64, iterations: usize },
    #[error("eigensolver stalled; residuals {0:?}")]
    EigenStalled(Vec<f64>),
    #[error(transparent)]
    Spectral(#[from] fraclab_spectral::SpectralError),
    #[error(transparent)]
    Measure(#[from] fraclab_measures::MeasureError),
}

pub type Result<T, E = DirichletError> = std::result::Result<T, E>;
