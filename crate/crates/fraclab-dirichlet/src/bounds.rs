//! Closed-form lower bounds for the Dirichlet spectrum.

use fraclab_kernel::binomial;
use fraclab_measures::{OrderMeasure, Part};

/// Smallest integer strictly above `s`.
pub fn block_index(s: f64) -> u64 {
    (s.floor() as i64 + 1).max(1) as u64
}

/// Constant `C` with `‖u‖² ≤ C · E_s(u)` for fields supported in a
/// bounded set of the given diameter, hence `λ₁ ≥ 1/C`.
pub fn poincare_constant(s: f64, diameter: f64) -> f64 {
    let s1 = block_index(s);
    let central = binomial(2 * s1, s1) as f64;
    2f64.powi(4 * s1 as i32 + 1) / (central * central) * diameter.powf(2.0 * s)
}

/// Lower bound for the first eigenvalue of a superposition form: the
/// positive mass on the closed window `[s_star, t]` contributes at least
/// this much coercivity per unit of squared mass.
pub fn generalized_poincare_floor(
    mu: &OrderMeasure,
    s_star: f64,
    t: f64,
    diameter: f64,
) -> f64 {
    let t1 = block_index(t);
    let c_t = 1f64.min(diameter.powf(-2.0 * t)) / (2.0 * std::f64::consts::PI * (t1 as f64 + 1.0));
    c_t * mu.mass_closed(Part::Plus, s_star, t)
}
