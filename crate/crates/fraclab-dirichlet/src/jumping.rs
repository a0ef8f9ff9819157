//! Jumping-nonlinearity functional and a best-effort critical point
//! search.
//!
//! The functional charges the positive and the negative part of the field
//! at different rates `b` and `a`, plus a critical power term,
//!
//! `E(u) = E(u,u)/2 - ∫(a (u⁻)² + b (u⁺)²)/2 - ∫|u|^{2*}/2*`.
//!
//! Critical points solve `form_apply(u) = b u⁺ - a u⁻ + |u|^{2*-2} u`.
//! The search minimizes the squared gradient norm from several seeds built
//! out of eigenvectors around the window index, which is the discrete
//! version of walking the linking set: nothing guarantees convergence, so
//! the outcome carries the full trace and a level report instead of a
//! promise.
//!
//! Sign parts are taken nodewise. For orders above 3/2 the continuum maps
//! `u ↦ u±` fall out of the energy space, so nodewise truncation is a
//! surrogate there, not a discretization of a well-defined operation.

use fraclab_measures::{MeasureFamily, OrderMeasure};
use fraclab_spectral::{GridFunction, MultiplierGrid};

use crate::domain::DomainMask;
use crate::eigen::eigenpairs;
use crate::mountain::checked_report;
use crate::operator::{MaskedOperator, Preconditioner, SolveResult};
use crate::{DirichletError, Result};

const SEED_CAP: usize = 300;
const AMPLITUDE_SCAN: usize = 12;

/// Spectral context of a candidate: where the window sits, what the level
/// bound is, and whether the candidate stays below it. `c_star` is `None`
/// when `λ_l ≤ min(a,b)`, where the bound degenerates.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LevelReport {
    pub lambda_l: f64,
    /// The admissible window `(λ_{l-1}, λ_{l+1})` for both `a` and `b`.
    pub window: (f64, f64),
    pub two_star: f64,
    pub volume: f64,
    pub candidate_level: f64,
    /// `(1/2 - 1/2*) |Ω| (λ_l - min{a,b})^{2*/(2*-2)}`.
    pub c_star: Option<f64>,
    pub below: Option<bool>,
}

/// Best candidate over all seeds. `converged` means the residual met the
/// tolerance with a nondegenerate field; otherwise the fields describe the
/// closest miss.
#[derive(Debug, Clone)]
pub struct JumpingOutcome {
    pub converged: bool,
    /// `energy` holds the level `E(u)`, `residual` the gradient norm,
    /// `trace` the squared-gradient objective per accepted step.
    pub result: SolveResult,
    pub level: LevelReport,
    pub attempts: usize,
}

fn value_grad(
    op: &MaskedOperator,
    weight: f64,
    a: f64,
    b: f64,
    two_star: f64,
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let ax = op.apply(x)?;
    let mut jump = 0.0;
    let mut power = 0.0;
    let mut g = Vec::with_capacity(x.len());
    for (&v, &av) in x.iter().zip(&ax) {
        let up = v.max(0.0);
        let um = (-v).max(0.0);
        jump += a * um * um + b * up * up;
        power += v.abs().powf(two_star);
        g.push(av - (b * up - a * um) - v.signum() * v.abs().powf(two_star - 1.0));
    }
    let e = op.dot(x, &ax);
    Ok((0.5 * e - 0.5 * weight * jump - weight * power / two_star, g))
}

/// Value and gradient of the functional at `u`, restricted to the domain.
/// The gradient is the field `form_apply(u) - (b u⁺ - a u⁻) - |u|^{2*-2} u`
/// on the domain nodes.
pub fn jumping_functional(
    mu: &OrderMeasure,
    family: &MeasureFamily,
    mask: &DomainMask,
    a: f64,
    b: f64,
    two_star: f64,
    u: &GridFunction,
) -> Result<(f64, GridFunction)> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(DirichletError::Assumptions(format!(
            "jumping rates must be positive, got a = {a}, b = {b}"
        )));
    }
    if !(two_star > 2.0) {
        return Err(DirichletError::BadExponent { q: two_star, critical: f64::INFINITY });
    }
    let mult = MultiplierGrid::superposition(mask.meta(), mu, family)?;
    let op = MaskedOperator::new(&mult, mask)?;
    let x = mask.pack(&mask.restrict(u)?);
    let (value, g) = value_grad(&op, mask.meta().cell_volume(), a, b, two_star, &x)?;
    Ok((value, mask.unpack(&g)))
}

/// `H(u) v` for the linearization of the gradient at `u`: the form part,
/// the jumping rate active at each node's sign, and the power term's
/// derivative.
fn hessian_apply(
    op: &MaskedOperator,
    a: f64,
    b: f64,
    two_star: f64,
    x: &[f64],
    v: &[f64],
) -> Result<Vec<f64>> {
    let av = op.apply(v)?;
    Ok(x.iter()
        .zip(v)
        .zip(av)
        .map(|((&xi, &vi), avi)| {
            let rate = if xi > 0.0 {
                b
            } else if xi < 0.0 {
                a
            } else {
                0.0
            };
            avi - rate * vi - (two_star - 1.0) * xi.abs().powf(two_star - 2.0) * vi
        })
        .collect())
}

/// Gauss-Newton direction: preconditioned conjugate gradients on
/// `H² d = -H g` with `H` frozen at the current point. The squared form
/// inherits the squared conditioning of the operator, so the spectral
/// `(m + shift)^{-1}` smoother applied twice is essential here; without it
/// the solve crawls.
fn newton_direction(
    op: &MaskedOperator,
    precond: &Preconditioner,
    a: f64,
    b: f64,
    two_star: f64,
    x: &[f64],
    neg_grad_g: &[f64],
) -> Result<Vec<f64>> {
    let apply_h2 = |v: &[f64]| -> Result<Vec<f64>> {
        let hv = hessian_apply(op, a, b, two_star, x, v)?;
        hessian_apply(op, a, b, two_star, x, &hv)
    };
    let smooth = |v: &[f64]| -> Result<Vec<f64>> {
        let once = precond.apply(v, op)?;
        precond.apply(&once, op)
    };
    let bnorm = op.norm(neg_grad_g);
    if bnorm == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    let mut d = vec![0.0; x.len()];
    let mut r = neg_grad_g.to_vec();
    let mut z = smooth(&r)?;
    let mut p = z.clone();
    let mut rz = op.dot(&r, &z);
    for _ in 0..200 {
        if op.norm(&r) <= 1e-2 * bnorm {
            break;
        }
        let ap = apply_h2(&p)?;
        let pap = op.dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..d.len() {
            d[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = smooth(&r)?;
        let rz_next = op.dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(d)
}

struct Candidate {
    x: Vec<f64>,
    level: f64,
    grad_norm: f64,
    trace: Vec<f64>,
}

fn descend_from(
    op: &MaskedOperator,
    precond: &Preconditioner,
    weight: f64,
    a: f64,
    b: f64,
    two_star: f64,
    seed: &[f64],
    tol: f64,
    floor_norm: f64,
) -> Result<Option<Candidate>> {
    let mut x = seed.to_vec();
    let (mut level, mut gj) = value_grad(op, weight, a, b, two_star, &x)?;
    let mut gn = op.norm(&gj);
    let mut obj = 0.5 * gn * gn;
    let mut trace = vec![obj];
    let mut best: Option<Candidate> = None;

    for _ in 0..SEED_CAP {
        if op.norm(&x) < floor_norm {
            return Ok(best);
        }
        let keep = best.as_ref().map_or(true, |c| gn < c.grad_norm);
        if keep {
            best = Some(Candidate { x: x.clone(), level, grad_norm: gn, trace: trace.clone() });
        }
        if gn <= tol {
            return Ok(best);
        }

        let hg = hessian_apply(op, a, b, two_star, &x, &gj)?;
        let neg_hg: Vec<f64> = hg.iter().map(|v| -v).collect();
        let mut direction = newton_direction(op, precond, a, b, two_star, &x, &neg_hg)?;
        let mut slope = op.dot(&hg, &direction);
        if !(slope < 0.0) {
            // smoothed steepest descent keeps the slope strictly negative
            let once = precond.apply(&neg_hg, op)?;
            direction = precond.apply(&once, op)?;
            slope = op.dot(&hg, &direction);
            if !(slope < 0.0) {
                return Ok(best);
            }
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let cand: Vec<f64> = x.iter().zip(&direction).map(|(xi, di)| xi + step * di).collect();
            let (cl, cg) = value_grad(op, weight, a, b, two_star, &cand)?;
            let cn = op.norm(&cg);
            let cobj = 0.5 * cn * cn;
            if cobj <= obj + 1e-4 * step * slope {
                x = cand;
                level = cl;
                gj = cg;
                gn = cn;
                obj = cobj;
                trace.push(obj);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Ok(best);
        }
    }
    Ok(best)
}

/// Searches for a critical point with rates inside the window
/// `(λ_{l-1}, λ_{l+1})²`. Seeds span the eigenvectors below the window
/// index plus the transverse one at it; each seed is first scaled along
/// its ray to the most promising amplitude. Best-effort: inspect
/// `converged` before trusting the candidate.
pub fn jumping_solve(
    mu: &OrderMeasure,
    family: &MeasureFamily,
    mask: &DomainMask,
    a: f64,
    b: f64,
    l: usize,
    p_fallback: f64,
    tol: f64,
) -> Result<JumpingOutcome> {
    if l < 2 {
        return Err(DirichletError::Assumptions(format!(
            "window index must be at least 2 so the window has a spectral gap on both sides, got {l}"
        )));
    }
    let meta = mask.meta();
    let mult = MultiplierGrid::superposition(meta, mu, family)?;
    if mult.has_negative() {
        return Err(DirichletError::IndefiniteForm { min_value: mult.min_value() });
    }
    let report = checked_report(mu, meta.dim(), p_fallback)?;
    let two_star = report.critical_exponent;
    if !(two_star > 2.0) {
        return Err(DirichletError::BadExponent { q: two_star, critical: f64::INFINITY });
    }

    let spectrum = eigenpairs(&mult, mask, l + 1)?;
    let lo = spectrum.eigenvalues[l - 2];
    let hi = spectrum.eigenvalues[l];
    let lambda_l = spectrum.eigenvalues[l - 1];
    if !(a > lo && a < hi && b > lo && b < hi) {
        return Err(DirichletError::WindowViolation { a, b, lo, hi });
    }

    let op = MaskedOperator::new(&mult, mask)?;
    let precond = op.preconditioner(op.default_shift());
    let weight = meta.cell_volume();
    let packed: Vec<Vec<f64>> =
        spectrum.eigenvectors.iter().map(|phi| mask.pack(phi)).collect();

    let combine = |coeffs: &[(usize, f64)]| -> Vec<f64> {
        let mut out = vec![0.0; packed[0].len()];
        for &(idx, c) in coeffs {
            for (o, v) in out.iter_mut().zip(&packed[idx]) {
                *o += c * v;
            }
        }
        out
    };
    let mut seeds = vec![
        combine(&[(l - 1, 1.0)]),
        combine(&[(l - 2, 1.0), (l - 1, 0.7)]),
        combine(&[(l - 2, 1.0), (l - 1, 0.1)]),
    ];
    {
        let scale = 1.0 / ((l - 1) as f64).sqrt();
        let mut coeffs: Vec<(usize, f64)> = (0..l - 1).map(|i| (i, scale)).collect();
        coeffs.push((l - 1, 1.0));
        seeds.push(combine(&coeffs));
    }

    let mut best: Option<Candidate> = None;
    let mut attempts = 0;
    for seed in &seeds {
        attempts += 1;
        let l2: f64 = weight * seed.iter().map(|v| v * v).sum::<f64>();
        let pw: f64 = weight * seed.iter().map(|v| v.abs().powf(two_star)).sum::<f64>();
        if !(pw > 0.0) {
            continue;
        }
        let t_ref = (lambda_l * l2 / pw).powf(1.0 / (two_star - 2.0));

        // Score amplitudes by the relative residual: the raw gradient norm
        // always shrinks toward the trivial critical point at zero, which
        // would steer every seed into the zero basin.
        let mut t_best = t_ref;
        let mut score_best = f64::INFINITY;
        for j in 0..AMPLITUDE_SCAN {
            let t = t_ref * 2f64.powf((j as f64 - 5.0) / 2.0);
            let scaled: Vec<f64> = seed.iter().map(|v| t * v).collect();
            let (_, g) = value_grad(&op, weight, a, b, two_star, &scaled)?;
            let score = op.norm(&g) / op.norm(&scaled);
            if score < score_best {
                score_best = score;
                t_best = t;
            }
        }
        let start: Vec<f64> = seed.iter().map(|v| t_best * v).collect();
        let floor_norm = 1e-6 * t_best * l2.sqrt();

        if let Some(c) =
            descend_from(&op, &precond, weight, a, b, two_star, &start, tol, floor_norm)?
        {
            let done = c.grad_norm <= tol;
            let better = best.as_ref().map_or(true, |cur| c.grad_norm < cur.grad_norm);
            if better {
                best = Some(c);
            }
            if done {
                break;
            }
        }
    }

    let cand = best.ok_or(DirichletError::NonConvergence {
        best_residual: f64::INFINITY,
        iterations: SEED_CAP,
    })?;
    let c_star = if lambda_l > a.min(b) {
        Some(
            (0.5 - 1.0 / two_star)
                * mask.volume()
                * (lambda_l - a.min(b)).powf(two_star / (two_star - 2.0)),
        )
    } else {
        None
    };
    let level = LevelReport {
        lambda_l,
        window: (lo, hi),
        two_star,
        volume: mask.volume(),
        candidate_level: cand.level,
        c_star,
        below: c_star.map(|c| cand.level < c),
    };
    Ok(JumpingOutcome {
        converged: cand.grad_norm <= tol,
        result: SolveResult {
            solution: mask.unpack(&cand.x),
            residual: cand.grad_norm,
            energy: cand.level,
            trace: cand.trace,
        },
        level,
        attempts,
    })
}
