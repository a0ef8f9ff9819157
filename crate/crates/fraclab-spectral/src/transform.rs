//! Discrete Fourier transforms with the normalization used by the energy
//! forms.
//!
//! Coefficients are stored unnormalized (plain DFT sums). All physical
//! constants live in [`Spectrum::plancherel_weight`]: with that weight the
//! summed squared coefficients reproduce the grid quadrature of `∫ u² dx`
//! exactly, so Parseval holds with the `dx^N` cell weight and no stray
//! `2π` factors appear anywhere downstream.

use std::sync::Arc;

use fraclab_kernel::par;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::{GridFunction, GridMeta};

/// DFT coefficients of a [`GridFunction`], row-major like the samples.
#[derive(Debug, Clone)]
pub struct Spectrum {
    meta: GridMeta,
    coeffs: Vec<Complex<f64>>,
}

impl Spectrum {
    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    pub fn coeffs(&self) -> &[Complex<f64>] {
        &self.coeffs
    }

    /// Weight `w` such that `w · Σ_k |c_k|²` equals `∫ u² dx` on the grid.
    pub fn plancherel_weight(&self) -> f64 {
        self.meta.cell_volume() / self.meta.total_nodes() as f64
    }

    /// `∫ u² dx` evaluated on the frequency side.
    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.plancherel_weight();
        w * par::indexed_sum(self.coeffs.len(), |k| self.coeffs[k].norm_sqr())
    }
}

fn transform_axes(meta: GridMeta, mut data: Vec<Complex<f64>>, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex<f64>> {
    let n = meta.nodes();
    if meta.dim() == 1 {
        fft.process(&mut data);
        return data;
    }
    let rows: Vec<Vec<Complex<f64>>> = par::indexed_map(n, |i| {
        let mut row = data[i * n..(i + 1) * n].to_vec();
        fft.process(&mut row);
        row
    });
    let cols: Vec<Vec<Complex<f64>>> = par::indexed_map(n, |j| {
        let mut col: Vec<Complex<f64>> = (0..n).map(|i| rows[i][j]).collect();
        fft.process(&mut col);
        col
    });
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            data[i * n + j] = *v;
        }
    }
    data
}

/// Forward transform of real samples.
pub fn forward(u: &GridFunction) -> Spectrum {
    let meta = u.meta();
    let data: Vec<Complex<f64>> = u.values().iter().map(|v| Complex::new(*v, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(meta.nodes());
    Spectrum { meta, coeffs: transform_axes(meta, data, &fft) }
}

/// Unnormalized-inverse transform divided by the node count, so it undoes
/// [`forward`].
pub(crate) fn inverse(meta: GridMeta, coeffs: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
    let fft = FftPlanner::new().plan_fft_inverse(meta.nodes());
    let mut out = transform_axes(meta, coeffs, &fft);
    let scale = 1.0 / meta.total_nodes() as f64;
    for v in &mut out {
        *v *= scale;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fraclab_kernel::SmoothField;

    #[test]
    fn parseval_holds_to_rounding() {
        let meta = GridMeta::new(1, 512, 6.0).unwrap();
        let field = SmoothField::bump_1d();
        let u = GridFunction::from_field(meta, &field).unwrap();
        let physical = u.l2_norm_sq();
        let spectral = forward(&u).l2_norm_sq();
        assert!(
            ((physical - spectral) / physical).abs() < 1e-12,
            "physical {physical} vs spectral {spectral}"
        );
    }

    #[test]
    fn parseval_holds_in_two_dimensions() {
        let meta = GridMeta::new(2, 64, 4.0).unwrap();
        let field = SmoothField::tensor_bump_2d();
        let u = GridFunction::from_field(meta, &field).unwrap();
        let physical = u.l2_norm_sq();
        let spectral = forward(&u).l2_norm_sq();
        assert!(((physical - spectral) / physical).abs() < 1e-12);
    }

    #[test]
    fn a_cosine_concentrates_on_two_frequencies() {
        let meta = GridMeta::new(1, 64, 4.0).unwrap();
        let k0 = 5usize;
        let u = GridFunction::sample_1d(meta, |x| {
            (2.0 * std::f64::consts::PI * k0 as f64 * x / 4.0).cos()
        })
        .unwrap();
        let spec = forward(&u);
        for k in 0..64 {
            let mag = spec.coeffs()[k].norm();
            let expected = if k == k0 || k == 64 - k0 { 32.0 } else { 0.0 };
            assert!(
                (mag - expected).abs() < 1e-9,
                "k = {k}: |c| = {mag}, expected {expected}"
            );
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let meta = GridMeta::new(2, 32, 2.0).unwrap();
        let u = GridFunction::sample_2d(meta, |x, y| (x * y).sin() + x).unwrap();
        let spec = forward(&u);
        let back = inverse(meta, spec.coeffs().to_vec());
        for (orig, rec) in u.values().iter().zip(&back) {
            assert!((orig - rec.re).abs() < 1e-12);
            assert!(rec.im.abs() < 1e-12);
        }
    }

    #[test]
    fn planar_transform_matches_the_direct_sum() {
        let meta = GridMeta::new(2, 8, 2.0).unwrap();
        let u = GridFunction::sample_2d(meta, |x, y| x + 0.3 * y * y + (x * 2.0).cos()).unwrap();
        let spec = forward(&u);
        let n = 8usize;
        for ki in 0..n {
            for kj in 0..n {
                let mut direct = Complex::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let phase = -2.0 * std::f64::consts::PI
                            * ((ki * i + kj * j) as f64)
                            / n as f64;
                        direct += u.values()[i * n + j] * Complex::new(phase.cos(), phase.sin());
                    }
                }
                let got = spec.coeffs()[ki * n + kj];
                assert!((got - direct).norm() < 1e-9, "({ki},{kj}): {got} vs {direct}");
            }
        }
    }
}
