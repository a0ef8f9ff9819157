//! Fourier multipliers of the operators: `M(ξ/|ξ|)·|ξ|^{2s} / M(e_s)` for a
//! single order and its integral against a signed order measure.
//!
//! `M` is the angular moment of the spherical measure and `e_s` its
//! maximizing direction, so the multiplier is normalized to touch `|ξ|^{2s}`
//! from below. Order zero acts as the identity and contributes the constant
//! multiplier 1.

use fraclab_kernel::par;
use fraclab_kernel::quad::gauss_legendre;
use fraclab_measures::{
    angular_moment, maximizing_direction, Direction, MeasureFamily, OrderMeasure,
    SphericalMeasure,
};
use rustfft::num_complex::Complex;

use crate::grid::{GridFunction, GridMeta};
use crate::transform::{forward, inverse};
use crate::{Result, SpectralError};

const DENSITY_GL_ORDER: usize = 32;

fn radius(dim: u8, xi: [f64; 2]) -> f64 {
    if dim == 1 {
        xi[0].abs()
    } else {
        xi[0].hypot(xi[1])
    }
}

fn unit_direction(dim: u8, xi: [f64; 2], r: f64) -> Result<Direction> {
    let dir = if dim == 1 {
        Direction::from_sign(if xi[0] < 0.0 { -1.0 } else { 1.0 })?
    } else {
        Direction::from_components(2, xi[0] / r, xi[1] / r)?
    };
    Ok(dir)
}

/// `M_{s,σ}(ξ/|ξ|)·|ξ|^{2s} / M_{s,σ}(e_s)`, the symbol of the operator of
/// differential order `m` for any admissible `m`. Order zero returns 1, and
/// the origin carries the value 0 for every positive order.
pub fn multiplier(sigma: &SphericalMeasure, s: f64, xi: [f64; 2]) -> Result<f64> {
    if s < 0.0 {
        return Err(SpectralError::NegativeOrder(s));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    sigma.validate()?;
    let r = radius(sigma.dim(), xi);
    if r == 0.0 {
        return Ok(0.0);
    }
    let dir = unit_direction(sigma.dim(), xi, r)?;
    let moment = angular_moment(sigma, &dir, 2.0 * s)?;
    let (_, peak) = maximizing_direction(sigma, s)?;
    Ok(r.powf(2.0 * s) * moment / peak)
}

/// One evaluation-ready piece of a superposed multiplier: an atom or a
/// quadrature node of a density, with its angular data precomputed.
struct Term {
    s: f64,
    coeff: f64,
    sigma_idx: usize,
    peak: f64,
}

struct TermSet {
    dim: u8,
    sigmas: Vec<SphericalMeasure>,
    terms: Vec<Term>,
}

impl TermSet {
    /// `rho` is the largest frequency magnitude the set will be evaluated
    /// at; it sets the panel count resolving `r^{2s} = e^{2s ln r}` in `s`.
    fn build(mu: &OrderMeasure, family: &MeasureFamily, rho: f64) -> Result<TermSet> {
        let mut set = TermSet { dim: family.dim(), sigmas: Vec::new(), terms: Vec::new() };
        for (atoms, sign) in [(mu.pos_atoms(), 1.0), (mu.neg_atoms(), -1.0)] {
            for &(s, w) in atoms {
                set.push_term(family, s, sign * w)?;
            }
        }
        let (nodes, weights) = gauss_legendre(DENSITY_GL_ORDER);
        for (pieces, sign) in [(mu.pos_density(), 1.0), (mu.neg_density(), -1.0)] {
            for piece in pieces {
                for (a, b, sigma) in family.segments_within(piece.lo, piece.hi) {
                    let idx = set.sigmas.len();
                    set.sigmas.push(sigma.clone());
                    let panels = (((b - a) * (1.0 + (1.0 + rho).ln())).ceil() as usize)
                        .clamp(2, 64);
                    let step = (b - a) / panels as f64;
                    for p in 0..panels {
                        let (lo, hi) = (a + p as f64 * step, a + (p + 1) as f64 * step);
                        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                        for (x, w) in nodes.iter().zip(weights) {
                            let s = mid + half * x;
                            let (_, peak) = maximizing_direction(sigma, s)?;
                            set.terms.push(Term {
                                s,
                                coeff: sign * piece.value * w * half,
                                sigma_idx: idx,
                                peak,
                            });
                        }
                    }
                }
            }
        }
        Ok(set)
    }

    fn push_term(&mut self, family: &MeasureFamily, s: f64, coeff: f64) -> Result<()> {
        if s == 0.0 {
            self.terms.push(Term { s, coeff, sigma_idx: usize::MAX, peak: 1.0 });
            return Ok(());
        }
        let sigma = family.sigma_at(s);
        let (_, peak) = maximizing_direction(&sigma, s)?;
        let idx = self.sigmas.len();
        self.sigmas.push(sigma);
        self.terms.push(Term { s, coeff, sigma_idx: idx, peak });
        Ok(())
    }

    fn eval(&self, xi: [f64; 2]) -> Result<f64> {
        let r = radius(self.dim, xi);
        if r == 0.0 {
            return Ok(self.terms.iter().filter(|t| t.s == 0.0).map(|t| t.coeff).sum());
        }
        let dir = unit_direction(self.dim, xi, r)?;
        let mut acc = 0.0;
        for t in &self.terms {
            if t.s == 0.0 {
                acc += t.coeff;
            } else {
                let moment = angular_moment(&self.sigmas[t.sigma_idx], &dir, 2.0 * t.s)?;
                acc += t.coeff * r.powf(2.0 * t.s) * moment / t.peak;
            }
        }
        Ok(acc)
    }
}

/// `∫ multiplier(σ_s, s, ξ) μ(ds)` with atoms summed exactly and densities
/// integrated by panelled Gauss-Legendre rules. The result is negative
/// wherever the negative part of `μ` dominates at that frequency.
pub fn superposition_multiplier(
    mu: &OrderMeasure,
    family: &MeasureFamily,
    xi: [f64; 2],
) -> Result<f64> {
    let rho = radius(family.dim(), xi).max(1.0);
    TermSet::build(mu, family, rho)?.eval(xi)
}

/// A multiplier tabulated on every discrete frequency of a grid.
#[derive(Debug, Clone)]
pub struct MultiplierGrid {
    meta: GridMeta,
    values: Vec<f64>,
    min_value: f64,
}

impl MultiplierGrid {
    fn from_values(meta: GridMeta, values: Vec<f64>) -> Self {
        let min_value = values.iter().fold(f64::INFINITY, |a, v| a.min(*v));
        Self { meta, values, min_value }
    }

    /// Tabulates an explicit value per discrete frequency, in grid index
    /// order. The caller is responsible for evenness.
    pub fn from_table(meta: GridMeta, values: Vec<f64>) -> Result<Self> {
        if values.len() != meta.total_nodes() {
            return Err(SpectralError::SampleCount {
                expected: meta.total_nodes(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFiniteSample(bad));
        }
        Ok(Self::from_values(meta, values))
    }

    fn assemble(meta: GridMeta, f: impl Fn([f64; 2]) -> Result<f64> + Sync) -> Result<Self> {
        let values: Result<Vec<f64>> =
            par::indexed_map(meta.total_nodes(), |idx| f(meta.frequency(idx)))
                .into_iter()
                .collect();
        Ok(Self::from_values(meta, values?))
    }

    /// Single-order multiplier for a spherical measure.
    pub fn single(meta: GridMeta, sigma: &SphericalMeasure, s: f64) -> Result<Self> {
        if sigma.dim() != meta.dim() {
            return Err(SpectralError::UnsupportedDimension(sigma.dim()));
        }
        if s < 0.0 {
            return Err(SpectralError::NegativeOrder(s));
        }
        if s == 0.0 {
            return Ok(Self::unit(meta));
        }
        sigma.validate()?;
        let (_, peak) = maximizing_direction(sigma, s)?;
        Self::assemble(meta, |xi| {
            let r = radius(meta.dim(), xi);
            if r == 0.0 {
                return Ok(0.0);
            }
            let dir = unit_direction(meta.dim(), xi, r)?;
            Ok(r.powf(2.0 * s) * angular_moment(sigma, &dir, 2.0 * s)? / peak)
        })
    }

    /// Superposed multiplier of a signed order measure.
    pub fn superposition(
        meta: GridMeta,
        mu: &OrderMeasure,
        family: &MeasureFamily,
    ) -> Result<Self> {
        if family.dim() != meta.dim() {
            return Err(SpectralError::UnsupportedDimension(family.dim()));
        }
        let rho = {
            let nyquist = std::f64::consts::PI * meta.nodes() as f64 / meta.length();
            (nyquist * (meta.dim() as f64).sqrt()).max(1.0)
        };
        let set = TermSet::build(mu, family, rho)?;
        Self::assemble(meta, |xi| set.eval(xi))
    }

    /// The isotropic power `|ξ|^{2s}` without angular weighting.
    pub fn pure(meta: GridMeta, s: f64) -> Result<Self> {
        if s < 0.0 {
            return Err(SpectralError::NegativeOrder(s));
        }
        Self::assemble(meta, |xi| {
            let r = radius(meta.dim(), xi);
            Ok(if s == 0.0 { 1.0 } else { r.powf(2.0 * s) })
        })
    }

    /// The constant multiplier 1 (the identity operator).
    pub fn unit(meta: GridMeta) -> Self {
        Self { meta, values: vec![1.0; meta.total_nodes()], min_value: 1.0 }
    }

    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Smallest tabulated value; negative exactly when the measure's
    /// negative part dominates at some frequency.
    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn has_negative(&self) -> bool {
        self.min_value < 0.0
    }
}

/// Applies the multiplier: inverse transform of `m(ξ)·û(ξ)`.
///
/// The output of the inverse transform is real up to rounding because the
/// input is real and the multiplier is even; the imaginary residue is
/// discarded after a sanity bound.
pub fn apply_spectral(mult: &MultiplierGrid, u: &GridFunction) -> Result<GridFunction> {
    if mult.meta() != u.meta() {
        return Err(SpectralError::GridMismatch(mult.meta(), u.meta()));
    }
    let meta = u.meta();
    let spec = forward(u);
    let scaled: Vec<Complex<f64>> = par::indexed_map(meta.total_nodes(), |k| {
        spec.coeffs()[k] * mult.value_at(k)
    });
    let back = inverse(meta, scaled);
    let mut real = Vec::with_capacity(back.len());
    let mut imag_linf: f64 = 0.0;
    let mut real_linf: f64 = 0.0;
    for v in &back {
        imag_linf = imag_linf.max(v.im.abs());
        real_linf = real_linf.max(v.re.abs());
        real.push(v.re);
    }
    if imag_linf > 1e-8 * real_linf.max(u.linf_norm()) {
        return Err(SpectralError::Format(format!(
            "imaginary residue {imag_linf:.2e} after an even real multiplier"
        )));
    }
    GridFunction::from_samples(meta, real)
}
