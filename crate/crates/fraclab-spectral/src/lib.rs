//! Fourier-side realization of the mixed-order operators on periodic grids.
//!
//! A [`GridFunction`] carries real samples on a uniform periodic box in one
//! or two dimensions. The operators act through their multipliers
//! `M(ξ/|ξ|)|ξ|^{2s} / M(e_s)` assembled per discrete frequency, which gives
//! the quadratic energy forms by Plancherel summation. A direct double-sum
//! evaluation of the same energy ([`energy_bruteforce_1d`]) serves as the
//! independent cross-check for the spectral route.

pub mod energy;
pub mod grid;
pub mod multiplier;
pub mod transform;

pub use energy::{
    comparison_suite, energy, energy_bruteforce_1d, x_norm, BruteForceEnergy, ComparisonEntry,
    ComparisonParams, ComparisonReport, GammaRatio, OrderBlock, XNorm,
};
pub use grid::{GridFunction, GridMeta};
pub use multiplier::{apply_spectral, multiplier, superposition_multiplier, MultiplierGrid};
pub use transform::{forward, Spectrum};

use fraclab_kernel::KernelError;
use fraclab_measures::MeasureError;

/// Errors from grid construction, serialization, and the spectral forms.
#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("unsupported dimension {0}; only N = 1 and N = 2 are handled")]
    UnsupportedDimension(u8),

    #[error("nodes per axis must be a power of two >= 2, got {0}")]
    NodesNotPowerOfTwo(usize),

    #[error("box length {0} is not positive and finite")]
    BadLength(f64),

    #[error("expected {expected} samples for this grid, got {got}")]
    SampleCount { expected: usize, got: usize },

    #[error("non-finite sample at flat index {0}")]
    NonFiniteSample(usize),

    #[error("grids disagree: {0} vs {1}")]
    GridMismatch(GridMeta, GridMeta),

    #[error("operation requires a one-dimensional grid, got N = {0}")]
    NotOneDimensional(u8),

    #[error("order s = {0} is negative")]
    NegativeOrder(f64),

    #[error(
        "support reaches within {clearance:.3} of the box boundary; \
         the periodic oracle needs clearance >= {required:.3}"
    )]
    SupportTooWide { clearance: f64, required: f64 },

    #[error("field vanishes identically; no support to locate")]
    EmptySupport,

    #[error("file does not describe a grid: {0}")]
    Format(String),

    #[error(transparent)]
    Measure(#[from] MeasureError),

    #[error(transparent)]
    Kernel(#[from] KernelError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = SpectralError> = std::result::Result<T, E>;
