//! Lowest eigenpairs of the masked form.
//!
//! The workhorse is blocked inverse subspace iteration: each sweep solves
//! one conjugate-gradient system per block column, reorthogonalizes, and
//! extracts Ritz pairs with a dense Jacobi diagonalization. Inverse
//! iteration favors exactly the small end of the spectrum, and every stage
//! is deterministic for a fixed seed. Small problems go straight to the
//! dense route; it also serves as the fallback when iteration stalls.

use fraclab_spectral::{GridFunction, MultiplierGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::DomainMask;
use crate::operator::{pcg, MaskedOperator};
use crate::{DirichletError, Result};

const SEED: u64 = 42;
const OUTER_CAP: usize = 5000;
const RESIDUAL_REL: f64 = 1e-8;
const DENSE_DIRECT: usize = 220;
const DENSE_FALLBACK: usize = 1500;

/// Converged eigenpairs, ascending.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// `‖Au − λu‖` per pair, each at most `1e-8 λ`.
    pub residuals: Vec<f64>,
    pub eigenvectors: Vec<GridFunction>,
    pub iterations: usize,
    /// Whether the dense route produced the result.
    pub dense: bool,
}

/// Cyclic Jacobi diagonalization of a symmetric matrix in row-major
/// storage. Returns eigenvalues ascending with matching eigenvectors.
pub(crate) fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * norm.max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    (values, vectors)
}

/// Modified Gram-Schmidt, two passes, against the operator's inner
/// product. Columns that collapse are replaced by fresh seeded noise.
fn orthonormalize(op: &MaskedOperator, cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    for j in 0..cols.len() {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = {
                    let (head, tail) = cols.split_at(j);
                    op.dot(&head[i], &tail[0])
                };
                let prev = cols[i].clone();
                for (x, p) in cols[j].iter_mut().zip(&prev) {
                    *x -= proj * p;
                }
            }
        }
        let mut norm = op.norm(&cols[j]);
        while norm < 1e-290 {
            for x in cols[j].iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
            for i in 0..j {
                let proj = {
                    let (head, tail) = cols.split_at(j);
                    op.dot(&head[i], &tail[0])
                };
                let prev = cols[i].clone();
                for (x, p) in cols[j].iter_mut().zip(&prev) {
                    *x -= proj * p;
                }
            }
            norm = op.norm(&cols[j]);
        }
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
}

fn ritz_step(
    op: &MaskedOperator,
    basis: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let b = basis.len();
    let applied: Vec<Vec<f64>> = basis.iter().map(|y| op.apply(y)).collect::<Result<_>>()?;
    let mut t = vec![0.0; b * b];
    for i in 0..b {
        for j in i..b {
            let val = 0.5 * (op.dot(&basis[i], &applied[j]) + op.dot(&basis[j], &applied[i]));
            t[i * b + j] = val;
            t[j * b + i] = val;
        }
    }
    let (values, coeffs) = jacobi_eigen(t, b);
    let rotate = |src: &[Vec<f64>]| -> Vec<Vec<f64>> {
        coeffs
            .iter()
            .map(|col| {
                let mut out = vec![0.0; src[0].len()];
                for (c, vec) in col.iter().zip(src) {
                    for (o, x) in out.iter_mut().zip(vec) {
                        *o += c * x;
                    }
                }
                out
            })
            .collect()
    };
    Ok((values, rotate(basis), rotate(&applied)))
}

fn dense_solve(op: &MaskedOperator, k: usize) -> Result<SpectrumResult> {
    let n = op.dim();
    let mut a = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = op.apply(&e)?;
        e[j] = 0.0;
        for i in 0..n {
            a[i * n + j] = col[i];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let sym = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = sym;
            a[j * n + i] = sym;
        }
    }
    let (_, vectors) = jacobi_eigen(a, n);
    let mut eigenvalues = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    for i in 0..k {
        let mut x = vectors[i].clone();
        let norm = op.norm(&x);
        for xi in x.iter_mut() {
            *xi /= norm;
        }
        let ax = op.apply(&x)?;
        let lambda = op.dot(&x, &ax);
        let res: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a - lambda * b).collect();
        eigenvalues.push(lambda);
        residuals.push(op.norm(&res));
        eigenvectors.push(op.mask.unpack(&x));
    }
    Ok(SpectrumResult { eigenvalues, residuals, eigenvectors, iterations: 0, dense: true })
}

/// Computes the `k` smallest eigenpairs of the masked form. Requires a
/// nonnegative multiplier; eigenvalues come out positive, ascending, each
/// with residual at most `1e-8 λ`.
pub fn eigenpairs(mult: &MultiplierGrid, mask: &DomainMask, k: usize) -> Result<SpectrumResult> {
    if mult.has_negative() {
        return Err(DirichletError::IndefiniteForm { min_value: mult.min_value() });
    }
    let op = MaskedOperator::new(mult, mask)?;
    let n = op.dim();
    if k == 0 || k > n {
        return Err(DirichletError::TooManyPairs { k, dim: n });
    }
    if n <= DENSE_DIRECT {
        return dense_solve(&op, k);
    }

    let block = (2 * k).clamp(k + 2, n);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut x: Vec<Vec<f64>> =
        (0..block).map(|_| (0..n).map(|_| rng.gen_range(-1.0_f64..1.0)).collect()).collect();
    orthonormalize(&op, &mut x, &mut rng);

    let precond = op.preconditioner(op.default_shift());
    let mut best: Vec<f64> = vec![f64::INFINITY; k];

    for outer in 1..=OUTER_CAP {
        let mut y = Vec::with_capacity(block);
        for col in &x {
            match pcg(&op, &precond, col, 1e-12, 200_000) {
                Ok(out) => y.push(out.x),
                Err(_) => y.push(col.clone()),
            }
        }
        orthonormalize(&op, &mut y, &mut rng);
        let (values, vectors, applied) = ritz_step(&op, &y)?;
        x = vectors;

        let mut converged = true;
        for i in 0..k {
            let res: Vec<f64> =
                applied[i].iter().zip(&x[i]).map(|(a, b)| a - values[i] * b).collect();
            let rnorm = op.norm(&res);
            best[i] = rnorm;
            if rnorm > RESIDUAL_REL * values[i].abs() {
                converged = false;
            }
        }
        if converged {
            let eigenvalues: Vec<f64> = values[..k].to_vec();
            let eigenvectors = x[..k].iter().map(|v| op.mask.unpack(v)).collect();
            return Ok(SpectrumResult {
                eigenvalues,
                residuals: best,
                eigenvectors,
                iterations: outer,
                dense: false,
            });
        }
    }

    if n <= DENSE_FALLBACK {
        return dense_solve(&op, k);
    }
    Err(DirichletError::EigenStalled(best))
}
