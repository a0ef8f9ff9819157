//! Gauss-Legendre rules and adaptive panel integration.
//!
//! Nodes and weights are computed once per order by Newton iteration on the
//! Legendre recurrence and cached. The adaptive driver certifies each panel
//! by comparing the rule against its half-order companion and bisects the
//! worst panel until the summed discrepancy meets the target.

use crate::{KernelError, Result};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

fn cache() -> &'static Mutex<HashMap<usize, &'static (Vec<f64>, Vec<f64>)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "rule needs at least two nodes");
    if let Some(hit) = cache().lock().unwrap().get(&n) {
        return hit;
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre_and_derivative(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    let leaked: &'static (Vec<f64>, Vec<f64>) = Box::leak(Box::new((nodes, weights)));
    cache().lock().unwrap().insert(n, leaked);
    leaked
}

/// Integrates `f` over `[a, b]` with the `n`-point rule.
pub fn gl_integrate(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Outcome of an adaptive integration: the value, a certified error
/// estimate, and the number of panels spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

impl PanelResult {
    pub const ZERO: PanelResult = PanelResult {
        value: 0.0,
        error: 0.0,
        panels: 0,
    };

    pub fn merge(self, other: PanelResult) -> PanelResult {
        PanelResult {
            value: self.value + other.value,
            error: self.error + other.error,
            panels: self.panels + other.panels,
        }
    }
}

const RULE_FULL: usize = 16;
const RULE_HALF: usize = 8;

/// Adaptively integrates `f` over `[a, b]` until the summed panel
/// discrepancies fall below `tol` or the panel budget is exhausted.
///
/// The returned error is the sum of 16-versus-8 point discrepancies, kept in
/// the result even on success so callers can fold it into their own budgets.
pub fn adaptive(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    budget: usize,
) -> Result<PanelResult> {
    if a >= b {
        return Ok(PanelResult::ZERO);
    }
    struct Panel {
        a: f64,
        b: f64,
        coarse: f64,
        fine: f64,
    }
    let make = |f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64| {
        let mut g = |x: f64| f(x);
        let fine = gl_integrate(&mut g, a, b, RULE_FULL);
        let coarse = gl_integrate(&mut g, a, b, RULE_HALF);
        Panel { a, b, coarse, fine }
    };
    let mut panels = vec![make(f, a, b)];
    loop {
        let total_err: f64 = panels.iter().map(|p| (p.fine - p.coarse).abs()).sum();
        if total_err <= tol {
            let value = panels.iter().map(|p| p.fine).sum();
            return Ok(PanelResult {
                value,
                error: total_err,
                panels: panels.len(),
            });
        }
        if panels.len() >= budget {
            return Err(KernelError::QuadratureBudget {
                budget,
                achieved: total_err,
                requested: tol,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| {
                let ep = (p.fine - p.coarse).abs();
                let eq = (q.fine - q.coarse).abs();
                ep.partial_cmp(&eq).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        panels.push(make(f, a, mid));
        panels.push(make(f, mid, b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_rules_match_known_nodes() {
        let (nodes, weights) = gauss_legendre(2);
        assert_relative_eq!(nodes[0], -(1.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(nodes[1], (1.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(weights[0], 1.0, epsilon = 1e-14);
        let (nodes3, weights3) = gauss_legendre(3);
        assert_relative_eq!(nodes3[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(weights3[1], 8.0 / 9.0, epsilon = 1e-14);
        assert_relative_eq!(nodes3[2], (0.6f64).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn rules_are_exact_on_matching_polynomial_degrees() {
        for n in [4usize, 8, 16, 32] {
            // Exact through degree 2n - 1.
            let deg = 2 * n - 1;
            let mut f = |x: f64| x.powi(deg as i32) + x.powi(2) + 1.0;
            let got = gl_integrate(&mut f, -1.0, 1.0, n);
            // Odd top power integrates to zero over a symmetric interval.
            assert_relative_eq!(got, 2.0 / 3.0 + 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [2usize, 5, 16, 32, 48] {
            let (_, weights) = gauss_legendre(n);
            let sum: f64 = weights.iter().sum();
            assert_relative_eq!(sum, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn adaptive_handles_oscillation_and_reports_error() {
        let mut f = |x: f64| (40.0 * x).cos();
        let res = adaptive(&mut f, 0.0, 3.0, 1e-12, 4000).unwrap();
        let exact = (120.0f64).sin() / 40.0;
        assert!((res.value - exact).abs() <= res.error + 1e-13);
        assert_relative_eq!(res.value, exact, epsilon = 1e-11);
        assert!(res.panels > 4);
    }

    #[test]
    fn adaptive_refuses_when_budget_is_too_small() {
        let mut f = |x: f64| (400.0 * x).cos().abs();
        let err = adaptive(&mut f, 0.0, 10.0, 1e-13, 3).unwrap_err();
        match err {
            KernelError::QuadratureBudget { budget, .. } => assert_eq!(budget, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
