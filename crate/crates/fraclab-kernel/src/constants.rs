//! Normalization constants for the kernels `c_{m,s} |y|^{-N-2s}`.
//!
//! Three independent routes are kept side by side: a closed form (available
//! at m = 1), certified quadrature of the cosine integral, and the binomial
//! recursion that transports the constant between differential orders. The
//! routes cross-check each other; none is ever silently substituted for
//! another.

use crate::quad::{adaptive, gl_integrate, PanelResult};
use crate::stencil::{binomial, MAX_ORDER};
use crate::{KernelError, Result};
use fraclab_measures::{maximizing_direction, MeasureFamily, SphericalMeasure};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Oscillatory-tail cutoff for the cosine integral, `64 π`.
pub const TAIL_CUTOFF: f64 = 64.0 * PI;

const PANEL_BUDGET: usize = 40_000;

/// `P_a(s) = sum_{k=1}^{a} (-1)^k C(2a, a-k) k^{2s}`, with the power
/// evaluated as `exp(2 s ln k)` so non-integer exponents are exact to
/// rounding.
pub fn pa_coefficient(a: usize, s: f64) -> Result<f64> {
    if a == 0 || a > MAX_ORDER {
        return Err(KernelError::UnsupportedOrder(a, MAX_ORDER));
    }
    let mut acc = 0.0;
    for k in 1..=a {
        let c = binomial(2 * a as u64, (a - k) as u64) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let pow = if k == 1 {
            1.0
        } else {
            (2.0 * s * (k as f64).ln()).exp()
        };
        acc += sign * c * pow;
    }
    Ok(acc)
}

/// Value and certified error of `I(m, s) = ∫_0^∞ (1 - cos τ)^m τ^{-1-2s} dτ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosineIntegral {
    pub value: f64,
    pub error: f64,
}

fn check_order_range(m: usize, s: f64) -> Result<()> {
    if m == 0 || m > MAX_ORDER {
        return Err(KernelError::UnsupportedOrder(m, MAX_ORDER));
    }
    if !(s > 0.0 && s < m as f64) {
        return Err(KernelError::OrderOutOfRange { m, s });
    }
    Ok(())
}

/// `1 - (sin u / u)^2`, stable through u = 0.
fn one_minus_sinc_sq(u: f64) -> f64 {
    if u.abs() < 0.35 {
        let w = u * u;
        w * (1.0 / 3.0
            - w * (2.0 / 45.0 - w * (1.0 / 315.0 - w * (2.0 / 14175.0 - w * (2.0 / 467775.0)))))
    } else {
        let t = u.sin() / u;
        1.0 - t * t
    }
}

/// Certified quadrature of the cosine integral.
///
/// On `(0, 1]` the factorization `(1 - cos τ)^m = 2^-m τ^2m r(τ)^m` with
/// `r(τ) = (sin(τ/2) / (τ/2))^2` splits off the exact power `2^-m/ε`,
/// `ε = 2m - 2s`, leaving a residual integrand of size `O(τ^{ε+1})` that
/// graded panels resolve in a few dozen halvings no matter how small ε gets;
/// the dropped innermost stretch is certified through `1 - r(τ) ≤ τ^2/12`.
/// On `(1, ∞)` the binomial expansion of `(1 - cos τ)^m` reduces the
/// integral to a power tail, which is exact, plus oscillatory terms
/// integrated up to [`TAIL_CUTOFF`] with the remainders beyond the cutoff
/// summed by parts until they are provably negligible.
pub fn cosine_integral(m: usize, s: f64, tol: f64) -> Result<CosineIntegral> {
    check_order_range(m, s)?;
    let eps = 2.0 * m as f64 - 2.0 * s;
    let beta = 1.0 + 2.0 * s;
    let m_f = m as f64;
    let two_neg_m = 2f64.powi(-(m as i32));

    // Residual part on (0, 1]. Dropping (0, 2^-J] costs at most
    // 2^-m (m/24) 4^-J, so the level count is uniform in ε.
    let inner_budget = 0.25 * tol;
    let levels = {
        let lead = two_neg_m * m_f / 24.0;
        ((lead / inner_budget).log2() / 2.0).ceil().clamp(1.0, 30.0) as usize
    };
    let skip_bound = two_neg_m * (m_f / 24.0) * 4f64.powi(-(levels as i32));
    let mut near = PanelResult::ZERO;
    let mut f = |t: f64| {
        let d = one_minus_sinc_sq(0.5 * t);
        (m_f * (-d).ln_1p()).exp_m1() * t.powf(eps - 1.0)
    };
    for j in 0..levels {
        let hi = 2f64.powi(-(j as i32));
        let lo = 0.5 * hi;
        let fine = gl_integrate(&mut f, lo, hi, 16);
        let coarse = gl_integrate(&mut f, lo, hi, 8);
        near = near.merge(PanelResult {
            value: fine,
            error: (fine - coarse).abs(),
            panels: 1,
        });
    }

    // Expansion on (1, ∞): 2^-m C(2m, m) carries the exact power tail, each
    // cosine harmonic is integrated to the cutoff and finished by parts.
    let scale = 2f64.powi(1 - m as i32);
    let mut value = two_neg_m * (near.value + 1.0 / eps)
        + two_neg_m * binomial(2 * m as u64, m as u64) as f64 / (2.0 * s);
    let mut error = two_neg_m * near.error + skip_bound;
    for q in 1..=m {
        let coeff = scale
            * binomial(2 * m as u64, (m - q) as u64) as f64
            * if q % 2 == 0 { 1.0 } else { -1.0 };
        let qf = q as f64;
        let mut f = |t: f64| (qf * t).cos() * t.powf(-beta);
        let finite = adaptive(&mut f, 1.0, TAIL_CUTOFF, tol / (8.0 * m as f64), PANEL_BUDGET)?;
        let (tail, tail_err) = oscillatory_tail(qf, beta, TAIL_CUTOFF);
        value += coeff * (finite.value + tail);
        error += coeff.abs() * (finite.error + tail_err);
    }
    Ok(CosineIntegral { value, error })
}

/// `∫_T^∞ cos(qτ) τ^{-β} dτ` by three rounds of integration by parts, with a
/// certified bound on the discarded remainder.
fn oscillatory_tail(q: f64, beta: f64, cutoff: f64) -> (f64, f64) {
    let boundary = |b: f64| {
        let sin_t = (q * cutoff).sin();
        let cos_t = (q * cutoff).cos();
        -sin_t * cutoff.powf(-b) / q + b * cos_t * cutoff.powf(-b - 1.0) / (q * q)
    };
    let mut total = 0.0;
    let mut factor = 1.0;
    let mut b = beta;
    for _ in 0..3 {
        total += factor * boundary(b);
        factor *= -b * (b + 1.0) / (q * q);
        b += 2.0;
    }
    let remainder = factor.abs() * cutoff.powf(-(b - 1.0)) / (b - 1.0);
    (total, remainder)
}

/// Closed form of the cosine integral at m = 1,
/// `cos(π s) Γ(2 - 2s) / (2s (1 - 2s))`, with the removable point s = 1/2
/// evaluated through `sin(π (1/2 - s)) / (2 (1/2 - s)) → π/2`.
pub fn closed_form_cosine_integral(s: f64) -> Result<f64> {
    check_order_range(1, s)?;
    let d = 0.5 - s;
    let sinc = if d.abs() < 1e-7 {
        let z = PI * d;
        0.5 * PI * (1.0 - z * z / 6.0)
    } else {
        (PI * d).sin() / (2.0 * d)
    };
    Ok(sinc * gamma(2.0 - 2.0 * s) / (2.0 * s))
}

/// Evaluation route for the normalization constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    ClosedForm,
    Recursion,
    Quadrature,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::ClosedForm => "closed-form",
            Route::Recursion => "recursion",
            Route::Quadrature => "quadrature",
        })
    }
}

/// A normalization constant together with the ingredients it was assembled
/// from, so reports can show the full provenance of the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantBundle {
    pub m: usize,
    pub s: f64,
    /// Angular moment at its maximizing direction.
    pub m_at_es: f64,
    /// The cosine integral `I(m, s)` used by this route.
    pub cosine_integral: f64,
    /// `c_{m,s} = 2^{1-m} / (m_at_es * cosine_integral)`.
    pub c_ms: f64,
    pub route: Route,
}

const QUADRATURE_TOL: f64 = 1e-10;

/// Assembles `c_{m,s}` for the given angular measure along the requested
/// route.
///
/// The recursion route transports the constant from the smallest admissible
/// differential order via the `P` coefficients and refuses when the target
/// coefficient vanishes, which happens exactly at integer orders strictly
/// between the two.
pub fn normalization_constant(
    m: usize,
    s: f64,
    sigma: &SphericalMeasure,
    route: Route,
) -> Result<ConstantBundle> {
    check_order_range(m, s)?;
    let (_, m_at_es) = maximizing_direction(sigma, s)?;
    let integral = match route {
        Route::ClosedForm => {
            if m != 1 {
                return Err(KernelError::RouteUnavailable(
                    "closed-form",
                    format!("no closed cosine integral at m = {m}"),
                ));
            }
            closed_form_cosine_integral(s)?
        }
        Route::Quadrature => cosine_integral(m, s, QUADRATURE_TOL)?.value,
        Route::Recursion => {
            let base = {
                let b = s.floor() as usize + 1;
                if b == m {
                    b + 1
                } else {
                    b
                }
            };
            if base > MAX_ORDER {
                return Err(KernelError::RouteUnavailable(
                    "recursion",
                    format!("no alternative order below the cap for m = {m}"),
                ));
            }
            let p_m = pa_coefficient(m, s)?;
            let p_base = pa_coefficient(base, s)?;
            let scale_m = binomial(2 * m as u64, m as u64) as f64;
            if p_m.abs() < 1e-12 * scale_m {
                return Err(KernelError::RecursionDegenerate { m, s });
            }
            let c_base = 2f64.powi(1 - base as i32) / cosine_integral(base, s, QUADRATURE_TOL)?.value;
            // c_m = c_base P_base / P_m; fold back into an effective integral
            // so the bundle stays uniform across routes.
            let c_m_unnormalized = c_base * p_base / p_m;
            2f64.powi(1 - m as i32) / c_m_unnormalized
        }
    };
    Ok(ConstantBundle {
        m,
        s,
        m_at_es,
        cosine_integral: integral,
        c_ms: 2f64.powi(1 - m as i32) / (m_at_es * integral),
        route,
    })
}

/// Which endpoint of `(0, m)` a limit table approaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitDirection {
    Zero,
    Top,
}

/// One row of a limit table: the rescaled constant at `s` against its
/// predicted limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub s: f64,
    pub scaled: f64,
    /// `None` when the predicted limit diverges (vanishing `P` coefficient).
    pub target: Option<f64>,
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitTable {
    pub direction: LimitDirection,
    pub m: usize,
    pub n: usize,
    pub target: Option<f64>,
    pub rows: Vec<LimitRow>,
    /// Linear extrapolation of the last two rows to the endpoint.
    pub extrapolated: Option<f64>,
}

/// Tabulates the rescaled constants along a sequence of orders approaching
/// an endpoint.
///
/// Toward zero the quantity is `c_{m,s} M / s` with limit `2 / (-P_m(0))`;
/// toward the top it is `c_{n,s} M / (m - s)` with limit `4 P_m(m) / P_n(m)`,
/// which degenerates (the table diverges) whenever `P_n(m) = 0`, i.e. for
/// any `n > m`.
pub fn constant_limits(
    m: usize,
    n: usize,
    family: &MeasureFamily,
    s_sequence: &[f64],
    direction: LimitDirection,
) -> Result<LimitTable> {
    if s_sequence.is_empty() {
        return Err(KernelError::RouteUnavailable(
            "limits",
            "empty order sequence".into(),
        ));
    }
    let target = match direction {
        LimitDirection::Zero => {
            let p_m0 = pa_coefficient(m, 0.0)?;
            Some(2.0 / (-p_m0))
        }
        LimitDirection::Top => {
            if n < m {
                return Err(KernelError::RouteUnavailable(
                    "limits",
                    format!("top limit needs n >= m, got n = {n}, m = {m}"),
                ));
            }
            let p_mm = pa_coefficient(m, m as f64)?;
            let p_nm = pa_coefficient(n, m as f64)?;
            let scale = binomial(2 * n as u64, n as u64) as f64;
            if p_nm.abs() < 1e-9 * scale {
                None
            } else {
                Some(4.0 * p_mm / p_nm)
            }
        }
    };
    let mut rows = Vec::with_capacity(s_sequence.len());
    for &s in s_sequence {
        let (order, h) = match direction {
            LimitDirection::Zero => (m, s),
            LimitDirection::Top => (n, m as f64 - s),
        };
        check_order_range(order, s)?;
        let sigma = family.sigma_at(s);
        let bundle = normalization_constant(order, s, &sigma, Route::Quadrature)?;
        let scaled = bundle.c_ms * bundle.m_at_es / h;
        rows.push(LimitRow {
            s,
            scaled,
            target,
            deviation: target.map(|t| (scaled - t).abs()),
        });
    }
    let extrapolated = if rows.len() >= 2 {
        let gap = |s: f64| match direction {
            LimitDirection::Zero => s,
            LimitDirection::Top => m as f64 - s,
        };
        let (hp, yp) = (gap(rows[rows.len() - 2].s), rows[rows.len() - 2].scaled);
        let (hl, yl) = (gap(rows[rows.len() - 1].s), rows[rows.len() - 1].scaled);
        if (hp - hl).abs() > 1e-300 {
            Some((yl * hp - yp * hl) / (hp - hl))
        } else {
            None
        }
    } else {
        None
    };
    Ok(LimitTable {
        direction,
        m,
        n,
        target,
        rows,
        extrapolated,
    })
}
