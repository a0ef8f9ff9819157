//! Difference stencils, kernel normalization constants, and pointwise
//! evaluation of the operators built from them.
//!
//! The crate is organized bottom-up: exact combinatorics ([`stencil`]),
//! reusable Gauss-Legendre and adaptive quadrature ([`quad`]), the kernel
//! constants with their three evaluation routes ([`constants`]), smooth test
//! fields carrying derivative certificates ([`field`]), and finally the
//! certified pointwise evaluator for single orders and signed superpositions
//! ([`pointwise`]).

pub mod constants;
pub mod field;
pub mod par;
pub mod pointwise;
pub mod quad;
pub mod stencil;

pub use constants::{
    constant_limits, cosine_integral, normalization_constant, pa_coefficient, ConstantBundle,
    CosineIntegral, LimitDirection, LimitRow, LimitTable, Route,
};
pub use field::SmoothField;
pub use pointwise::{
    apply_lms, apply_lms_batch, apply_superposition, evaluation_bound_check, limit_checks,
    m_independence_check, BoundCheck, Evaluation, IndependenceReport, LimitReport, LimitRowCheck,
    QuadratureSpec,
};
pub use stencil::{
    bilinear_weight_identity, binomial, chu_vandermonde_check, delta_m, exponential_difference,
    exponential_difference_closed_form, DifferenceStencil,
};

use fraclab_measures::MeasureError;
use thiserror::Error;

/// Errors produced while assembling constants or evaluating operators.
#[derive(Debug, Error)]
pub enum KernelError {
    #[error("order s = {s} outside (0, {m}) for differential order m = {m}")]
    OrderOutOfRange { m: usize, s: f64 },

    #[error("differential order m = {0} outside supported range 1..={1}")]
    UnsupportedOrder(usize, usize),

    #[error("route {0} unavailable: {1}")]
    RouteUnavailable(&'static str, String),

    #[error("recursion degenerate at m = {m}, s = {s}: use quadrature")]
    RecursionDegenerate { m: usize, s: f64 },

    #[error("field certifies {available} derivative orders, evaluation needs {needed}")]
    UncertifiedField { needed: usize, available: usize },

    #[error("superposition not certified at x = {x:?}: {reason}")]
    UncertifiedSuperposition { x: [f64; 2], reason: String },

    #[error("quadrature budget of {budget} panels exhausted: error {achieved:.3e} above target {requested:.3e}")]
    QuadratureBudget {
        budget: usize,
        achieved: f64,
        requested: f64,
    },

    #[error("dimension mismatch: field is {field}-dimensional, measure is {measure}-dimensional")]
    DimensionMismatch { field: u8, measure: u8 },

    #[error(transparent)]
    Measure(#[from] MeasureError),
}

pub type Result<T> = std::result::Result<T, KernelError>;
