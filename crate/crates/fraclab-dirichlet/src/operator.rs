//! The quadratic form restricted to the masked subspace and its
//! conjugate-gradient solver.

use fraclab_spectral::{apply_spectral, energy, GridFunction, MultiplierGrid};

use crate::domain::DomainMask;
use crate::{DirichletError, Result};

/// Applies the masked operator: scatter, spectral application, restrict.
/// The input must vanish outside the domain.
pub fn form_apply(
    mult: &MultiplierGrid,
    mask: &DomainMask,
    u: &GridFunction,
) -> Result<GridFunction> {
    if mult.meta() != mask.meta() {
        return Err(DirichletError::GridMismatch(mult.meta(), mask.meta()));
    }
    mask.vanishes_outside(u)?;
    let lu = apply_spectral(mult, u)?;
    mask.restrict(&lu)
}

/// The masked operator on packed coordinate vectors, the shape every
/// iterative solver in this crate works with.
pub(crate) struct MaskedOperator<'a> {
    pub mult: &'a MultiplierGrid,
    pub mask: &'a DomainMask,
    weight: f64,
}

impl<'a> MaskedOperator<'a> {
    pub fn new(mult: &'a MultiplierGrid, mask: &'a DomainMask) -> Result<Self> {
        if mult.meta() != mask.meta() {
            return Err(DirichletError::GridMismatch(mult.meta(), mask.meta()));
        }
        Ok(Self { mult, mask, weight: mask.meta().cell_volume() })
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    /// L² inner product of packed vectors.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weight * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).sqrt()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let grid = self.mask.unpack(v);
        let out = apply_spectral(self.mult, &grid)?;
        Ok(self.mask.pack(&out))
    }

    /// Approximate inverse through the unmasked operator, diagonal in
    /// frequency: `(m(ξ) + shift)^{-1}` with restriction. Symmetric and
    /// positive on the subspace, which is all conjugate gradients need.
    pub fn preconditioner(&self, shift: f64) -> Preconditioner<'a> {
        let meta = self.mult.meta();
        let inv: Vec<f64> =
            (0..meta.total_nodes()).map(|k| 1.0 / (self.mult.value_at(k) + shift)).collect();
        Preconditioner { inv: MultiplierGrid::from_table(meta, inv).unwrap(), mask: self.mask }
    }

    /// Smallest positive multiplier value, the natural preconditioner
    /// shift: it matches the scale of the lowest nonzero frequency.
    pub fn default_shift(&self) -> f64 {
        let meta = self.mult.meta();
        let mut shift = f64::INFINITY;
        for k in 0..meta.total_nodes() {
            let v = self.mult.value_at(k);
            if v > 0.0 && v < shift {
                shift = v;
            }
        }
        if shift.is_finite() {
            shift
        } else {
            1.0
        }
    }
}

pub(crate) struct Preconditioner<'a> {
    inv: MultiplierGrid,
    mask: &'a DomainMask,
}

impl Preconditioner<'_> {
    pub fn apply(&self, v: &[f64], op: &MaskedOperator) -> Result<Vec<f64>> {
        let grid = op.mask.unpack(v);
        let out = apply_spectral(&self.inv, &grid)?;
        Ok(self.mask.pack(&out))
    }
}

pub(crate) struct CgOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub trace: Vec<f64>,
}

/// Preconditioned conjugate gradients on the masked subspace. Residual
/// tolerance is relative to the right-hand side norm.
pub(crate) fn pcg(
    op: &MaskedOperator,
    precond: &Preconditioner,
    b: &[f64],
    tol_rel: f64,
    cap: usize,
) -> Result<CgOutcome> {
    let bnorm = op.norm(b);
    if bnorm == 0.0 {
        return Ok(CgOutcome { x: vec![0.0; b.len()], residual: 0.0, trace: vec![] });
    }
    let target = tol_rel * bnorm;

    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut z = precond.apply(&r, op)?;
    let mut p = z.clone();
    let mut rz = op.dot(&r, &z);
    let mut trace = Vec::new();

    for _ in 0..cap {
        let rnorm = op.norm(&r);
        trace.push(rnorm);
        if rnorm <= target {
            return Ok(CgOutcome { x, residual: rnorm, trace });
        }
        let ap = op.apply(&p)?;
        let pap = op.dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = precond.apply(&r, op)?;
        let rz_next = op.dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = op.norm(&r);
    Err(DirichletError::NonConvergence { best_residual: rnorm / bnorm, iterations: cap })
}

/// Outcome of an iterative solve: the field, its final residual, the
/// energy at the solution, and the per-iteration residual trace.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: GridFunction,
    pub residual: f64,
    pub energy: f64,
    pub trace: Vec<f64>,
}

/// Solves `form_apply(u) = f` on the masked subspace by preconditioned
/// conjugate gradients. The exterior part of `f` is discarded, which is the
/// Galerkin right-hand side for the exterior condition. Refuses multipliers
/// with negative values: the form is indefinite there and the solve loses
/// meaning.
pub fn linear_solve(
    mult: &MultiplierGrid,
    mask: &DomainMask,
    f: &GridFunction,
    tol: f64,
) -> Result<SolveResult> {
    if mult.has_negative() {
        return Err(DirichletError::IndefiniteForm { min_value: mult.min_value() });
    }
    let op = MaskedOperator::new(mult, mask)?;
    let b = mask.pack(&mask.restrict(f)?);
    let precond = op.preconditioner(op.default_shift());
    let out = pcg(&op, &precond, &b, tol, 50_000)?;
    let solution = mask.unpack(&out.x);
    let e = energy(&solution, &solution, mult)?;
    Ok(SolveResult {
        solution,
        residual: out.residual,
        energy: e,
        trace: out.trace,
    })
}
