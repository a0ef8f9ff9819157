//! Central difference stencils of even order and their exact combinatorial
//! identities.

use crate::{KernelError, Result};

/// Largest differential order with exact `u128` binomial arithmetic and
/// tested identities.
pub const MAX_ORDER: usize = 8;

/// Exact binomial coefficient via the multiplicative formula.
///
/// Every intermediate product is divisible by the running denominator, so the
/// computation stays in integers. Panics on overflow, which cannot happen for
/// the `n <= 4 * MAX_ORDER` range used here.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// The centered difference of order `2m`, represented as offsets `k` with
/// weights `(-1)^k C(2m, m-k)` for `k = -m..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceStencil {
    m: usize,
    weights: Vec<(i64, f64)>,
}

impl DifferenceStencil {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_ORDER {
            return Err(KernelError::UnsupportedOrder(m, MAX_ORDER));
        }
        let mut weights = Vec::with_capacity(2 * m + 1);
        for k in -(m as i64)..=(m as i64) {
            let c = binomial(2 * m as u64, (m as i64 - k) as u64) as f64;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            weights.push((k, sign * c));
        }
        Ok(Self { m, weights })
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// Offset/weight pairs, offsets ascending from `-m` to `m`.
    pub fn weights(&self) -> &[(i64, f64)] {
        &self.weights
    }

    /// The coefficient of the `k = 0` node, `C(2m, m)`.
    pub fn central_weight(&self) -> f64 {
        binomial(2 * self.m as u64, self.m as u64) as f64
    }

    /// Applies the stencil to a function of one variable at `x` with step `h`.
    pub fn apply_line(&self, f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        self.weights
            .iter()
            .map(|&(k, w)| w * f(x + k as f64 * h))
            .sum()
    }

    /// Signed moment `sum_k w_k k^j`. Vanishes for `j < 2m` and for odd `j`;
    /// at `j = 2m` it equals `(-1)^m (2m)!`.
    pub fn moment(&self, j: u32) -> f64 {
        self.weights
            .iter()
            .map(|&(k, w)| w * (k as f64).powi(j as i32))
            .sum()
    }

    /// Absolute moment `sum_k |w_k| |k|^j`, used in remainder bounds.
    pub fn absolute_moment(&self, j: u32) -> f64 {
        self.weights
            .iter()
            .map(|&(k, w)| w.abs() * (k as f64).abs().powi(j as i32))
            .sum()
    }

    /// `sum_k |w_k| = 4^m`.
    pub fn weight_l1(&self) -> f64 {
        self.weights.iter().map(|&(_, w)| w.abs()).sum()
    }
}

/// Evaluates `delta_m u (x, y) = sum_k (-1)^k C(2m, m-k) u(x + k y)` for a
/// one-dimensional field.
pub fn delta_m(m: usize, u: impl Fn(f64) -> f64, x: f64, y: f64) -> Result<f64> {
    let stencil = DifferenceStencil::new(m)?;
    Ok(stencil.apply_line(u, x, y))
}

/// The stencil applied to `t -> exp(i a t)` at the origin with step `t`,
/// returned as (real, imaginary) parts.
///
/// The closed form is `2^m (1 - cos t)^m` with vanishing imaginary part; the
/// pair lets callers verify both facts against the direct sum.
pub fn exponential_difference(m: usize, t: f64) -> Result<(f64, f64)> {
    let stencil = DifferenceStencil::new(m)?;
    let re = stencil.apply_line(|v| v.cos(), 0.0, t);
    let im = stencil.apply_line(|v| v.sin(), 0.0, t);
    Ok((re, im))
}

/// Closed form `2^m (1 - cos t)^m`, evaluated as `(2 sin^2(t/2))^m * 2^m`
/// to stay accurate near `t = 0`.
pub fn exponential_difference_closed_form(m: usize, t: f64) -> f64 {
    let half = (t / 2.0).sin();
    (4.0 * half * half).powi(m as i32)
}

/// The pairing identity behind bilinear-form assembly: summing products of
/// stencil weight magnitudes over all offset pairs, grouped by relative
/// shift, matches the full binomial row of order `4m`,
/// `sum_{k,h} C(2m, m-k) C(2m, m-k+h) = sum_h C(4m, 2m-h) = 2^{4m}`.
///
/// Returned as the floating-point pair (left, right) so callers can confirm
/// the identity survives the summation order used in assembly.
pub fn bilinear_weight_identity(m: usize) -> Result<(f64, f64)> {
    if m == 0 || m > MAX_ORDER {
        return Err(KernelError::UnsupportedOrder(m, MAX_ORDER));
    }
    let mi = m as i64;
    let mut lhs = 0.0_f64;
    for k in -mi..=mi {
        for h in (k - mi)..=(k + mi) {
            let second = mi - k + h;
            if !(0..=2 * mi).contains(&second) {
                continue;
            }
            lhs += binomial(2 * m as u64, (mi - k) as u64) as f64
                * binomial(2 * m as u64, second as u64) as f64;
        }
    }
    let mut rhs = 0.0_f64;
    for h in -(2 * mi)..=(2 * mi) {
        rhs += binomial(4 * m as u64, (2 * mi - h) as u64) as f64;
    }
    Ok((lhs, rhs))
}

/// Verifies `sum_j C(2m, j) C(2m, j+h) = C(4m, 2m-h)` for every shift `h`
/// with `|h| <= 2m`, in exact integer arithmetic.
pub fn chu_vandermonde_check(m: usize) -> Result<bool> {
    if m == 0 || m > MAX_ORDER {
        return Err(KernelError::UnsupportedOrder(m, MAX_ORDER));
    }
    let n = 2 * m as i64;
    for h in -n..=n {
        let mut lhs: u128 = 0;
        for j in 0..=n {
            let jh = j + h;
            if (0..=n).contains(&jh) {
                lhs += binomial(n as u64, j as u64) * binomial(n as u64, jh as u64);
            }
        }
        let rhs = binomial(2 * n as u64, (n - h) as u64);
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}
