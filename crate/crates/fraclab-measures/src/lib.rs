//! Measure-theoretic building blocks for anisotropic nonlocal operators of
//! mixed order: probability measures on the unit sphere (the angular part of
//! the jump kernel) and finite signed measures on `[0, inf)` selecting which
//! orders participate in a superposition.

pub mod order;
pub mod profile;
pub mod sphere;

pub use order::{AssumptionReport, DensityPiece, OrderMeasure, Part, PathologicalKind};
pub use profile::{
    bump, pathological_partial_sums, squeezed_bump, ProbeEntry, SampledProfile, SummabilityProbe,
};
pub use sphere::{
    angular_moment, ellipticity_report, integrated_measure, maximizing_direction,
    minimizing_value, Component, Direction, EllipticityReport, MaximizerEntry, MeasureFamily,
    SphericalMeasure,
};

/// Error type shared by the measure constructors and operations.
#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("unsupported dimension {0}; only N = 1 and N = 2 are handled")]
    UnsupportedDimension(u8),
    #[error("total mass {0} is not 1 within 1e-12")]
    NotProbability(f64),
    #[error("atom direction has norm {0}, expected a unit vector within 1e-12")]
    NotUnit(f64),
    #[error("mixture coefficients sum to {0}, expected 1 within 1e-12")]
    MixtureWeights(f64),
    #[error("negative weight {0} in a measure")]
    NegativeWeight(f64),
    #[error("mixed dimensions inside one measure")]
    MixedDimensions,
    #[error("empty {0} measure")]
    Empty(&'static str),
    #[error("breakpoints must be strictly increasing and nonnegative")]
    BadBreakpoints,
    #[error("family needs exactly one piece more than it has breakpoints")]
    PieceCount,
    #[error("direction has norm {0}, expected a unit vector")]
    BadDirection(f64),
    #[error("negative moment exponent {0}")]
    NegativeExponent(f64),
    #[error("order measure: {0}")]
    OrderMeasure(String),
    #[error("no positive order mass on [{0}, {1}]; integrated measure undefined")]
    ZeroOrderMass(f64, f64),
    #[error(
        "spectral derivative untrusted beyond k = {trusted}: relative deviation {deviation:.2e} \
         under grid doubling exceeds {bound:.0e}"
    )]
    UntrustedDerivative {
        trusted: usize,
        deviation: f64,
        bound: f64,
    },
    #[error("requested K = {0} exceeds the supported truncation cap {1}")]
    TruncationTooLarge(usize, usize),
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, MeasureError>;
