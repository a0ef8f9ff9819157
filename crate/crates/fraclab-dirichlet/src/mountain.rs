//! Mountain pass solver for the subcritical problem
//! `form_apply(u) = |u|^{q-2} u` on a masked domain.
//!
//! The functional `J(u) = E(u,u)/2 - ‖u‖_q^q / q` has the mountain pass
//! geometry when `2 < q` stays below the critical exponent of the order
//! measure. Its nonzero critical points all lie on the fiber where
//! `E(u,u) = ‖u‖_q^q`, and the pass level is the minimum of `J` over that
//! fiber, so the solver runs projected gradient descent: full gradient
//! step, rescale back onto the fiber, Armijo backtracking on `J`.
//!
//! The certificate quantities are computed from a measured embedding
//! constant `c_q = max ‖v‖_q² / E(v,v)` over a finite probe set, so the
//! reported ball radius is relative to that measurement rather than to the
//! true supremum.

use fraclab_measures::{MeasureFamily, OrderMeasure, Part};
use fraclab_spectral::{energy, GridFunction, MultiplierGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::DomainMask;
use crate::operator::{MaskedOperator, SolveResult};
use crate::{DirichletError, Result};

const PROBE_SEED: u64 = 42;
const OUTER_CAP: usize = 50_000;

/// Ball-and-level geometry around the origin, derived from the measured
/// embedding constant.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MountainPassCertificate {
    /// Squared energy radius of the ball on whose boundary `J ≥ beta`.
    pub rho: f64,
    /// Level floor on the sphere, `rho / 4`.
    pub beta: f64,
    /// Energy of the far point, outside the ball.
    pub far_energy: f64,
    /// Value of `J` at the far point, negative.
    pub far_level: f64,
    /// Measured `max ‖v‖_q² / E(v,v)` over the probe fields.
    pub embedding_constant: f64,
}

/// A critical point together with its certificate.
#[derive(Debug, Clone)]
pub struct MountainPassSolution {
    /// `energy` holds the level `J(u)`, `residual` the final gradient
    /// norm, `trace` the gradient norm per accepted step.
    pub result: SolveResult,
    pub certificate: MountainPassCertificate,
    /// Relative gap `|E(u,u) - ‖u‖_q^q| / E(u,u)` at the solution.
    pub nehari_mismatch: f64,
}

/// Splitting order for the structural checks: midway between the top of
/// the negative support and the first positive support point above it.
pub(crate) fn split_order(mu: &OrderMeasure) -> Result<f64> {
    let pos_inf = mu
        .support_inf(Part::Plus)
        .ok_or(fraclab_measures::MeasureError::Empty("positive part"))?;
    match mu.support_sup(Part::Minus) {
        None => Ok(pos_inf),
        Some(neg_top) => {
            let mut above = f64::INFINITY;
            for &(s, _) in mu.pos_atoms() {
                if s > neg_top && s < above {
                    above = s;
                }
            }
            for piece in mu.pos_density() {
                let lo = piece.lo.max(neg_top);
                if piece.hi > neg_top && lo < above {
                    above = lo;
                }
            }
            if above.is_finite() {
                Ok(0.5 * (neg_top + above.max(neg_top)))
            } else {
                Err(DirichletError::Assumptions(format!(
                    "no positive mass above the negative support top {neg_top}"
                )))
            }
        }
    }
}

pub(crate) fn checked_report(
    mu: &OrderMeasure,
    dim: u8,
    p_fallback: f64,
) -> Result<fraclab_measures::AssumptionReport> {
    let s_star = split_order(mu)?;
    let report = mu.check_assumptions(s_star, dim, p_fallback)?;
    if !report.satisfied {
        let mut faults = Vec::new();
        if report.neg_mass_above > 0.0 {
            faults.push(format!(
                "negative mass {:.3e} above the split order {}",
                report.neg_mass_above, report.s_star
            ));
        }
        if !(report.pos_mass_above > 0.0) {
            faults.push(format!("no positive mass above the split order {}", report.s_star));
        }
        if report.gamma >= 1.0 {
            faults.push(format!(
                "negative-to-positive mass ratio {:.3} is not below one",
                report.gamma
            ));
        }
        return Err(DirichletError::Assumptions(faults.join("; ")));
    }
    Ok(report)
}

/// Smooth product-sine profile over the bounding box of the domain nodes,
/// padded by one cell so no inside node sits at a zero of the profile.
fn default_seed(mask: &DomainMask) -> GridFunction {
    let meta = mask.meta();
    let dim = meta.dim() as usize;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for &idx in mask.indices() {
        let p = meta.point(idx);
        for a in 0..dim {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let dx = meta.dx();
    let mut u = GridFunction::zeros(meta);
    for &idx in mask.indices() {
        let p = meta.point(idx);
        let mut val = 1.0;
        for a in 0..dim {
            let width = hi[a] - lo[a] + 2.0 * dx;
            val *= (std::f64::consts::PI * (p[a] - lo[a] + dx) / width).sin();
        }
        u.values_mut()[idx] = val;
    }
    u
}

struct Fiber<'a> {
    op: &'a MaskedOperator<'a>,
    q: f64,
    weight: f64,
}

impl Fiber<'_> {
    fn qnorm_pow(&self, x: &[f64]) -> f64 {
        self.weight * x.iter().map(|v| v.abs().powf(self.q)).sum::<f64>()
    }

    /// Scales `x` onto `E(u,u) = ‖u‖_q^q` and returns the scaled state
    /// `(x, Ax, E, P)`. `None` when either form degenerates.
    fn project(&self, x: Vec<f64>, ax: Vec<f64>) -> Option<(Vec<f64>, Vec<f64>, f64, f64)> {
        let e = self.op.dot(&x, &ax);
        let p = self.qnorm_pow(&x);
        if !(e > 0.0) || !(p > 0.0) {
            return None;
        }
        let t = (e / p).powf(1.0 / (self.q - 2.0));
        let x = x.into_iter().map(|v| t * v).collect();
        let ax = ax.into_iter().map(|v| t * v).collect();
        Some((x, ax, t * t * e, t.powf(self.q) * p))
    }

    fn level(&self, e: f64, p: f64) -> f64 {
        0.5 * e - p / self.q
    }

    fn gradient(&self, x: &[f64], ax: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(ax)
            .map(|(&v, &av)| av - v.signum() * v.abs().powf(self.q - 1.0))
            .collect()
    }
}

fn probe_fields(mask: &DomainMask, count: usize) -> Vec<GridFunction> {
    let meta = mask.meta();
    let dim = meta.dim() as usize;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for &idx in mask.indices() {
        let p = meta.point(idx);
        for a in 0..dim {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut centers = [[0.0; 2]; 3];
        let mut widths = [0.0; 3];
        let mut amps = [0.0; 3];
        for b in 0..3 {
            for a in 0..dim {
                centers[b][a] = rng.gen_range(lo[a]..=hi[a]);
            }
            let span = (0..dim).map(|a| hi[a] - lo[a]).fold(f64::INFINITY, f64::min);
            widths[b] = rng.gen_range(0.15..0.5) * span.max(meta.dx());
            amps[b] = rng.gen_range(-1.0..1.0);
        }
        let mut u = GridFunction::zeros(meta);
        for &idx in mask.indices() {
            let p = meta.point(idx);
            let mut val = 0.0;
            for b in 0..3 {
                let mut d2 = 0.0;
                for a in 0..dim {
                    d2 += (p[a] - centers[b][a]).powi(2);
                }
                val += amps[b] * (-d2 / (widths[b] * widths[b])).exp();
            }
            u.values_mut()[idx] = val;
        }
        out.push(u);
    }
    out
}

fn certificate(
    fiber: &Fiber,
    q: f64,
    solution: &[f64],
    seed: &[f64],
    e_star: f64,
    p_star: f64,
    mask: &DomainMask,
) -> Result<MountainPassCertificate> {
    let mut c_q: f64 = 0.0;
    let mut consider = |x: &[f64]| -> Result<()> {
        let ax = fiber.op.apply(x)?;
        let e = fiber.op.dot(x, &ax);
        let p = fiber.qnorm_pow(x);
        if e > 1e-300 && p > 0.0 {
            c_q = c_q.max(p.powf(2.0 / q) / e);
        }
        Ok(())
    };
    consider(solution)?;
    consider(seed)?;
    for field in probe_fields(mask, 40) {
        consider(&mask.pack(&field))?;
    }
    let rho = (q / (4.0 * c_q.powf(q / 2.0))).powf(2.0 / (q - 2.0));
    let t_far = 1.1 * (q / 2.0).powf(1.0 / (q - 2.0));
    let far_energy = t_far * t_far * e_star;
    let far_level = 0.5 * far_energy - t_far.powf(q) * p_star / q;
    Ok(MountainPassCertificate {
        rho,
        beta: rho / 4.0,
        far_energy,
        far_level,
        embedding_constant: c_q,
    })
}

/// Runs the fiber-projected descent from the given seed, or from a smooth
/// bump over the domain when no seed is supplied. Stops when the gradient
/// norm drops below `tol`.
pub fn solve_mountain_pass(
    mu: &OrderMeasure,
    family: &MeasureFamily,
    mask: &DomainMask,
    q: f64,
    tol: f64,
    seed: Option<&GridFunction>,
) -> Result<MountainPassSolution> {
    let meta = mask.meta();
    let mult = MultiplierGrid::superposition(meta, mu, family)?;
    if mult.has_negative() {
        return Err(DirichletError::IndefiniteForm { min_value: mult.min_value() });
    }
    let report = checked_report(mu, meta.dim(), 2.0 * q)?;
    if !(q > 2.0) || !(q < report.critical_exponent) {
        return Err(DirichletError::BadExponent { q, critical: report.critical_exponent });
    }

    let seed_field = match seed {
        Some(u) => {
            if u.meta() != meta {
                return Err(DirichletError::GridMismatch(u.meta(), meta));
            }
            mask.restrict(u)?
        }
        None => default_seed(mask),
    };
    let op = MaskedOperator::new(&mult, mask)?;
    let fiber = Fiber { op: &op, q, weight: meta.cell_volume() };

    let x0 = mask.pack(&seed_field);
    if op.norm(&x0) == 0.0 {
        return Err(DirichletError::ZeroSeed);
    }
    let ax0 = op.apply(&x0)?;
    let (mut x, mut ax, mut e, mut p) =
        fiber.project(x0.clone(), ax0).ok_or(DirichletError::ZeroSeed)?;
    let mut level = fiber.level(e, p);

    let mut alpha = {
        let nx = op.norm(&x);
        nx * nx / e
    };
    let mut trace = Vec::new();
    let mut best = f64::INFINITY;

    for _ in 0..OUTER_CAP {
        let g = fiber.gradient(&x, &ax);
        let gn = op.norm(&g);
        trace.push(gn);
        best = best.min(gn);
        if gn <= tol {
            let solution = mask.unpack(&x);
            let cert = certificate(&fiber, q, &x, &x0, e, p, mask)?;
            return Ok(MountainPassSolution {
                result: SolveResult { solution, residual: gn, energy: level, trace },
                certificate: cert,
                nehari_mismatch: (e - p).abs() / e,
            });
        }

        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
            let cand_ax = op.apply(&cand)?;
            if let Some((nx, nax, ne, np)) = fiber.project(cand, cand_ax) {
                let nl = fiber.level(ne, np);
                if nl <= level - 1e-4 * alpha * gn * gn {
                    x = nx;
                    ax = nax;
                    e = ne;
                    p = np;
                    level = nl;
                    alpha *= 1.5;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(DirichletError::NonConvergence { best_residual: best, iterations: trace.len() })
}

/// `|E(u, φ) - ∫ |u|^{q-2} u φ| / ‖φ‖_{L²}` for a masked test field, the
/// defect in the weak form of the Euler-Lagrange equation.
pub fn weak_equation_residual(
    mult: &MultiplierGrid,
    mask: &DomainMask,
    u: &GridFunction,
    q: f64,
    phi: &GridFunction,
) -> Result<f64> {
    let phi = mask.restrict(phi)?;
    let w = mask.meta().cell_volume();
    let phi_norm = phi.l2_norm_sq().sqrt();
    let lhs = energy(u, &phi, mult)?;
    let rhs: f64 = w
        * u.values()
            .iter()
            .zip(phi.values())
            .map(|(&uv, &pv)| uv.signum() * uv.abs().powf(q - 1.0) * pv)
            .sum::<f64>();
    let scale = if phi_norm > 0.0 { phi_norm } else { 1.0 };
    Ok((lhs - rhs).abs() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fraclab_measures::SphericalMeasure;
    use fraclab_spectral::GridMeta;

    fn single_family() -> MeasureFamily {
        MeasureFamily::constant(SphericalMeasure::uniform(1).unwrap()).unwrap()
    }

    #[test]
    fn split_order_lands_between_the_parts() {
        let mu = OrderMeasure::from_parts(&[(0.5, 1.0)], &[(0.25, 0.05)], &[], &[]).unwrap();
        assert!((split_order(&mu).unwrap() - 0.375).abs() < 1e-15);
        let plain = OrderMeasure::dirac(0.5).unwrap();
        assert!((split_order(&plain).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn default_seed_is_positive_inside() {
        let meta = GridMeta::new(1, 128, 8.0).unwrap();
        let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
        let u = default_seed(&mask);
        for &idx in mask.indices() {
            assert!(u.values()[idx] > 0.0);
        }
        mask.vanishes_outside(&u).unwrap();
    }

    #[test]
    fn descent_finds_a_positive_level() {
        let meta = GridMeta::new(1, 256, 8.0).unwrap();
        let mu = OrderMeasure::dirac(0.5).unwrap();
        let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
        let sol = solve_mountain_pass(&mu, &single_family(), &mask, 4.0, 1e-5, None).unwrap();
        assert!(sol.result.residual <= 1e-5);
        assert!(sol.result.energy > 0.0);
        assert!(sol.nehari_mismatch < 1e-8);
        assert!(sol.certificate.far_level < 0.0);
        assert!(sol.certificate.beta > 0.0);
        assert!(sol.certificate.far_energy > sol.certificate.rho);
    }

    #[test]
    fn bad_exponents_are_rejected() {
        let meta = GridMeta::new(1, 128, 8.0).unwrap();
        let mu = OrderMeasure::dirac(0.5).unwrap();
        let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
        let family = single_family();
        assert!(matches!(
            solve_mountain_pass(&mu, &family, &mask, 1.5, 1e-5, None),
            Err(DirichletError::BadExponent { .. })
        ));
        // In the plane the critical exponent of order 1/2 is 4.
        let meta2 = GridMeta::new(2, 32, 8.0).unwrap();
        let mask2 = DomainMask::disk(meta2, [0.0, 0.0], 1.0).unwrap();
        let family2 = MeasureFamily::constant(SphericalMeasure::uniform(2).unwrap()).unwrap();
        assert!(matches!(
            solve_mountain_pass(&mu, &family2, &mask2, 4.5, 1e-5, None),
            Err(DirichletError::BadExponent { critical, .. }) if (critical - 4.0).abs() < 1e-12
        ));
    }

    #[test]
    fn zero_seed_is_rejected() {
        let meta = GridMeta::new(1, 128, 8.0).unwrap();
        let mu = OrderMeasure::dirac(0.5).unwrap();
        let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
        let zero = GridFunction::zeros(meta);
        assert!(matches!(
            solve_mountain_pass(&mu, &single_family(), &mask, 4.0, 1e-5, Some(&zero)),
            Err(DirichletError::ZeroSeed)
        ));
    }

    #[test]
    fn weak_residual_vanishes_at_the_critical_point() {
        let meta = GridMeta::new(1, 256, 8.0).unwrap();
        let mu = OrderMeasure::dirac(0.5).unwrap();
        let family = single_family();
        let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
        let sol = solve_mountain_pass(&mu, &family, &mask, 4.0, 5e-7, None).unwrap();
        let mult = MultiplierGrid::superposition(meta, &mu, &family).unwrap();
        let phi = default_seed(&mask);
        let r = weak_equation_residual(&mult, &mask, &sol.result.solution, 4.0, &phi).unwrap();
        assert!(r < 1e-6, "weak residual {r}");
    }
}
