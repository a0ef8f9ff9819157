//! Smooth test fields carrying the metadata the pointwise evaluator needs:
//! a support radius (zero meaning unbounded support) and certified sup bounds
//! on directional derivatives.

use crate::{KernelError, Result};
use fraclab_measures::{bump, SampledProfile};
use std::sync::Arc;

/// Grid used to measure derivative bounds of the built-in bump profiles.
const CERT_GRID: usize = 1 << 14;
/// Highest derivative order certified for the built-in profiles.
const CERT_ORDERS: usize = 12;

type Evaluator = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// A scalar field together with its evaluation closure and certificates.
///
/// `derivative_sups[k-1]` bounds the sup over points and unit directions of
/// the k-th directional derivative. For the measured (as opposed to exact)
/// certificates a safety margin is folded in at construction time.
#[derive(Clone)]
pub struct SmoothField {
    name: String,
    dim: u8,
    eval: Evaluator,
    support_radius: f64,
    sup_norm: f64,
    derivative_sups: Vec<f64>,
}

impl std::fmt::Debug for SmoothField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("support_radius", &self.support_radius)
            .field("sup_norm", &self.sup_norm)
            .field("certified_orders", &self.derivative_sups.len())
            .finish()
    }
}

fn measured_sups(f: impl Fn(f64) -> f64, half_length: f64) -> Vec<f64> {
    let profile = SampledProfile::sample(f, CERT_GRID, half_length);
    (1..=CERT_ORDERS)
        .map(|k| {
            // spectral sups are measured, not exact; the margin grows with the
            // order as the filtered tail noise does
            let margin = if k <= 8 { 1.25 } else { 2.0 };
            margin * profile.derivative_sup(k)
        })
        .collect()
}

impl SmoothField {
    pub fn custom(
        name: impl Into<String>,
        dim: u8,
        eval: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
        support_radius: f64,
        sup_norm: f64,
        derivative_sups: Vec<f64>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(KernelError::DimensionMismatch {
                field: dim,
                measure: dim,
            });
        }
        Ok(Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            support_radius,
            sup_norm,
            derivative_sups,
        })
    }

    /// The standard bump `exp(1 - 1/(1 - (2x)^2))` on `(-1/2, 1/2)`.
    pub fn bump_1d() -> Self {
        Self {
            name: "bump".into(),
            dim: 1,
            eval: Arc::new(|x| bump(x[0])),
            support_radius: 0.5,
            sup_norm: 1.0,
            derivative_sups: measured_sups(bump, 1.0),
        }
    }

    /// Plane wave `cos(freq * x)` with exact derivative bounds `|freq|^k`.
    pub fn cosine_1d(freq: f64) -> Self {
        Self {
            name: format!("cos({freq} x)"),
            dim: 1,
            eval: Arc::new(move |x| (freq * x[0]).cos()),
            support_radius: 0.0,
            sup_norm: 1.0,
            derivative_sups: (1..=CERT_ORDERS as i32).map(|k| freq.abs().powi(k)).collect(),
        }
    }

    /// Tensor bump `bump(x) bump(y)`. The directional derivative bound comes
    /// from the binomial expansion along an arbitrary unit direction.
    pub fn tensor_bump_2d() -> Self {
        let line = measured_sups(bump, 1.0);
        let mut with_zero = vec![1.0];
        with_zero.extend_from_slice(&line);
        let sups = (1..=CERT_ORDERS)
            .map(|k| {
                (0..=k)
                    .map(|j| {
                        crate::stencil::binomial(k as u64, j as u64) as f64
                            * with_zero[j]
                            * with_zero[k - j]
                    })
                    .sum()
            })
            .collect();
        Self {
            name: "bump⊗bump".into(),
            dim: 2,
            eval: Arc::new(|x| bump(x[0]) * bump(x[1])),
            support_radius: 0.5f64.hypot(0.5),
            sup_norm: 1.0,
            derivative_sups: sups,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        (self.eval)(x)
    }

    /// Radius of a ball (centred at the origin) containing the support;
    /// zero means the support is unbounded.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn is_compact(&self) -> bool {
        self.support_radius > 0.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Certified bound on the k-th directional derivative, if available.
    pub fn derivative_bound(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return Some(self.sup_norm);
        }
        self.derivative_sups.get(k - 1).copied()
    }

    pub fn certified_orders(&self) -> usize {
        self.derivative_sups.len()
    }

    /// Restriction to the line `t -> x + t theta`.
    pub fn line_function<'a>(&'a self, x: [f64; 2], theta: [f64; 2]) -> impl Fn(f64) -> f64 + 'a {
        move |t| (self.eval)([x[0] + t * theta[0], x[1] + t * theta[1]])
    }

    /// The rescaled field `x -> u(x / rho)`.
    pub fn dilated(&self, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(KernelError::RouteUnavailable(
                "dilation",
                format!("scale must be positive, got {rho}"),
            ));
        }
        let inner = self.eval.clone();
        Ok(Self {
            name: format!("{}∘(x/{rho})", self.name),
            dim: self.dim,
            eval: Arc::new(move |x| inner([x[0] / rho, x[1] / rho])),
            support_radius: self.support_radius * rho,
            sup_norm: self.sup_norm,
            derivative_sups: self
                .derivative_sups
                .iter()
                .enumerate()
                .map(|(i, s)| s / rho.powi(i as i32 + 1))
                .collect(),
        })
    }

    /// The shifted field `x -> u(x - shift)`; the support ball stays centred
    /// at the origin, so its radius grows by `|shift|`.
    pub fn translated(&self, shift: [f64; 2]) -> Self {
        let inner = self.eval.clone();
        let radius = if self.support_radius > 0.0 {
            self.support_radius + shift[0].hypot(shift[1])
        } else {
            0.0
        };
        Self {
            name: format!("{} shifted", self.name),
            dim: self.dim,
            eval: Arc::new(move |x| inner([x[0] - shift[0], x[1] - shift[1]])),
            support_radius: radius,
            sup_norm: self.sup_norm,
            derivative_sups: self.derivative_sups.clone(),
        }
    }

    /// `a u + b v`, with certificates combined by the triangle inequality.
    pub fn linear_combination(a: f64, u: &SmoothField, b: f64, v: &SmoothField) -> Result<Self> {
        if u.dim != v.dim {
            return Err(KernelError::DimensionMismatch {
                field: u.dim,
                measure: v.dim,
            });
        }
        let (ue, ve) = (u.eval.clone(), v.eval.clone());
        let orders = u.derivative_sups.len().min(v.derivative_sups.len());
        let radius = if u.is_compact() && v.is_compact() {
            u.support_radius.max(v.support_radius)
        } else {
            0.0
        };
        Ok(Self {
            name: format!("{a}·{} + {b}·{}", u.name, v.name),
            dim: u.dim,
            eval: Arc::new(move |x| a * ue(x) + b * ve(x)),
            support_radius: radius,
            sup_norm: a.abs() * u.sup_norm + b.abs() * v.sup_norm,
            derivative_sups: (0..orders)
                .map(|i| a.abs() * u.derivative_sups[i] + b.abs() * v.derivative_sups[i])
                .collect(),
        })
    }
}
