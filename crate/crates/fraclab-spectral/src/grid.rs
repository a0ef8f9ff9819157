//! Periodic sampling grids and their serialization.
//!
//! The box is `[-L/2, L/2)^N` sampled at `nodes` points per axis, so the
//! spacing is `dx = L / nodes` and the discrete frequencies are `2π k / L`
//! with `k` running over the signed index range of the DFT.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use fraclab_kernel::SmoothField;
use serde::Serialize;

use crate::{Result, SpectralError};

/// Shape of a grid: dimension, nodes per axis, and box length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMeta {
    dim: u8,
    nodes: usize,
    length: f64,
}

impl fmt::Display for GridMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} nodes={} L={}", self.dim, self.nodes, self.length)
    }
}

impl GridMeta {
    pub fn new(dim: u8, nodes: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(SpectralError::UnsupportedDimension(dim));
        }
        if nodes < 2 || !nodes.is_power_of_two() {
            return Err(SpectralError::NodesNotPowerOfTwo(nodes));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::BadLength(length));
        }
        Ok(Self { dim, nodes, length })
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nodes as f64
    }

    pub fn total_nodes(&self) -> usize {
        if self.dim == 1 {
            self.nodes
        } else {
            self.nodes * self.nodes
        }
    }

    /// Physical quadrature weight of one cell, `dx^N`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Same grid again but with twice the nodes per axis.
    pub fn doubled(&self) -> Self {
        Self { dim: self.dim, nodes: self.nodes * 2, length: self.length }
    }

    /// Signed DFT index for an axis index in `0..nodes`; the Nyquist index
    /// maps to the negative side.
    pub fn signed_index(&self, k: usize) -> i64 {
        if k < self.nodes / 2 {
            k as i64
        } else {
            k as i64 - self.nodes as i64
        }
    }

    /// Frequency `2π k / L` along one axis.
    pub fn axis_frequency(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.signed_index(k) as f64 / self.length
    }

    /// Frequency vector at a flat index; the second component is zero in 1D.
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        if self.dim == 1 {
            [self.axis_frequency(idx), 0.0]
        } else {
            let (i, j) = (idx / self.nodes, idx % self.nodes);
            [self.axis_frequency(i), self.axis_frequency(j)]
        }
    }

    /// Physical coordinates at a flat index; the second component is zero
    /// in 1D.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let dx = self.dx();
        let start = -0.5 * self.length;
        if self.dim == 1 {
            [start + idx as f64 * dx, 0.0]
        } else {
            let (i, j) = (idx / self.nodes, idx % self.nodes);
            [start + i as f64 * dx, start + j as f64 * dx]
        }
    }
}

/// Real samples on a [`GridMeta`] in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    meta: GridMeta,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_samples(meta: GridMeta, values: Vec<f64>) -> Result<Self> {
        if values.len() != meta.total_nodes() {
            return Err(SpectralError::SampleCount {
                expected: meta.total_nodes(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFiniteSample(bad));
        }
        Ok(Self { meta, values })
    }

    pub fn zeros(meta: GridMeta) -> Self {
        let values = vec![0.0; meta.total_nodes()];
        Self { meta, values }
    }

    pub fn sample_1d(meta: GridMeta, f: impl Fn(f64) -> f64) -> Result<Self> {
        if meta.dim() != 1 {
            return Err(SpectralError::NotOneDimensional(meta.dim()));
        }
        let values = (0..meta.total_nodes()).map(|i| f(meta.point(i)[0])).collect();
        Self::from_samples(meta, values)
    }

    pub fn sample_2d(meta: GridMeta, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if meta.dim() != 2 {
            return Err(SpectralError::UnsupportedDimension(meta.dim()));
        }
        let values = (0..meta.total_nodes())
            .map(|i| {
                let p = meta.point(i);
                f(p[0], p[1])
            })
            .collect();
        Self::from_samples(meta, values)
    }

    /// Samples a smooth field of matching dimension.
    pub fn from_field(meta: GridMeta, u: &SmoothField) -> Result<Self> {
        if u.dim() != meta.dim() {
            return Err(SpectralError::UnsupportedDimension(u.dim()));
        }
        let values = (0..meta.total_nodes()).map(|i| u.evaluate(meta.point(i))).collect();
        Self::from_samples(meta, values)
    }

    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `∫ u² dx` by the grid quadrature.
    pub fn l2_norm_sq(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v * v).sum();
        sum * self.meta.cell_volume()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Distance from the farthest nonzero sample to the box boundary,
    /// minimized over axes.
    pub fn support_clearance(&self) -> Result<f64> {
        let half = 0.5 * self.meta.length();
        let mut clearance = f64::INFINITY;
        let mut seen = false;
        for (idx, v) in self.values.iter().enumerate() {
            if *v != 0.0 {
                seen = true;
                let p = self.meta.point(idx);
                clearance = clearance.min(half - p[0].abs());
                if self.meta.dim() == 2 {
                    clearance = clearance.min(half - p[1].abs());
                }
            }
        }
        if !seen {
            return Err(SpectralError::EmptySupport);
        }
        Ok(clearance)
    }

    /// Enforces the clearance the periodic oracles assume: supports must stay
    /// at least `L/4` away from the boundary.
    pub fn require_clearance(&self) -> Result<f64> {
        let clearance = self.support_clearance()?;
        let required = 0.25 * self.meta.length();
        if clearance < required {
            return Err(SpectralError::SupportTooWide { clearance, required });
        }
        Ok(clearance)
    }

    /// Largest coordinate magnitude carrying a nonzero sample.
    pub fn support_radius(&self) -> Result<f64> {
        let mut radius: f64 = 0.0;
        let mut seen = false;
        for (idx, v) in self.values.iter().enumerate() {
            if *v != 0.0 {
                seen = true;
                let p = self.meta.point(idx);
                radius = radius.max(p[0].abs());
                if self.meta.dim() == 2 {
                    radius = radius.max(p[1].abs());
                }
            }
        }
        if !seen {
            return Err(SpectralError::EmptySupport);
        }
        Ok(radius)
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&(self.meta.dim() as u32).to_le_bytes())?;
        w.write_all(&(self.meta.nodes() as u32).to_le_bytes())?;
        w.write_all(&self.meta.length().to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let dim = u32::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let nodes = u32::from_le_bytes(word);
        let mut wide = [0u8; 8];
        r.read_exact(&mut wide)?;
        let length = f64::from_le_bytes(wide);
        let dim = u8::try_from(dim)
            .map_err(|_| SpectralError::Format(format!("dimension field {dim}")))?;
        let meta = GridMeta::new(dim, nodes as usize, length)?;
        let mut values = Vec::with_capacity(meta.total_nodes());
        for _ in 0..meta.total_nodes() {
            r.read_exact(&mut wide)?;
            values.push(f64::from_le_bytes(wide));
        }
        let mut tail = [0u8; 1];
        if r.read(&mut tail)? != 0 {
            return Err(SpectralError::Format("trailing bytes after samples".into()));
        }
        Self::from_samples(meta, values)
    }

    /// Writes `x,value` rows (1D) or `x,y,value` rows (2D) with a header.
    pub fn write_csv(&self, sink: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        if self.meta.dim() == 1 {
            w.write_record(["x", "value"])?;
        } else {
            w.write_record(["x", "y", "value"])?;
        }
        for (idx, v) in self.values.iter().enumerate() {
            let p = self.meta.point(idx);
            if self.meta.dim() == 1 {
                w.write_record([format!("{:.17e}", p[0]), format!("{v:.17e}")])?;
            } else {
                w.write_record([
                    format!("{:.17e}", p[0]),
                    format!("{:.17e}", p[1]),
                    format!("{v:.17e}"),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }

    /// Reconstructs a grid from its CSV form; the shape is inferred from the
    /// column count and the coordinate columns.
    pub fn read_csv(source: impl Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(source);
        let dim = match r.headers()?.len() {
            2 => 1u8,
            3 => 2u8,
            n => return Err(SpectralError::Format(format!("{n} columns"))),
        };
        let mut coords: Vec<[f64; 2]> = Vec::new();
        let mut values = Vec::new();
        for record in r.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| SpectralError::Format("short row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| SpectralError::Format(e.to_string()))
            };
            if dim == 1 {
                coords.push([parse(0)?, 0.0]);
                values.push(parse(1)?);
            } else {
                coords.push([parse(0)?, parse(1)?]);
                values.push(parse(2)?);
            }
        }
        let nodes = if dim == 1 {
            values.len()
        } else {
            let n = (values.len() as f64).sqrt().round() as usize;
            if n * n != values.len() {
                return Err(SpectralError::Format(format!(
                    "{} rows do not form a square grid",
                    values.len()
                )));
            }
            n
        };
        if nodes < 2 || !nodes.is_power_of_two() {
            return Err(SpectralError::NodesNotPowerOfTwo(nodes));
        }
        // Consecutive rows advance the fastest axis, which fixes the spacing.
        let axis = if dim == 1 { 0 } else { 1 };
        let dx = coords[1][axis] - coords[0][axis];
        let length = dx * nodes as f64;
        let meta = GridMeta::new(dim, nodes, length)?;
        let tol = 1e-9 * length.max(1.0);
        for (idx, c) in coords.iter().enumerate() {
            let p = meta.point(idx);
            if (c[0] - p[0]).abs() > tol || (c[1] - p[1]).abs() > tol {
                return Err(SpectralError::Format(format!(
                    "row {idx} coordinates do not sit on a uniform grid"
                )));
            }
        }
        Self::from_samples(meta, values)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: f64) -> f64 {
        if x.abs() < 1.0 {
            (-1.0 / (1.0 - x * x)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn meta_rejects_bad_shapes() {
        assert!(GridMeta::new(3, 64, 1.0).is_err());
        assert!(GridMeta::new(1, 63, 1.0).is_err());
        assert!(GridMeta::new(1, 64, 0.0).is_err());
        assert!(GridMeta::new(2, 64, f64::NAN).is_err());
    }

    #[test]
    fn frequencies_cover_the_signed_range() {
        let meta = GridMeta::new(1, 8, 4.0).unwrap();
        let signed: Vec<i64> = (0..8).map(|k| meta.signed_index(k)).collect();
        assert_eq!(signed, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        let xi = meta.axis_frequency(1);
        assert!((xi - std::f64::consts::PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn points_tile_the_centered_box() {
        let meta = GridMeta::new(2, 4, 2.0).unwrap();
        assert_eq!(meta.point(0), [-1.0, -1.0]);
        assert_eq!(meta.point(5), [-0.5, -0.5]);
        assert_eq!(meta.point(15), [0.5, 0.5]);
        assert_eq!(meta.total_nodes(), 16);
    }

    #[test]
    fn l2_norm_matches_a_riemann_sum() {
        let meta = GridMeta::new(1, 1024, 8.0).unwrap();
        let u = GridFunction::sample_1d(meta, bump).unwrap();
        // Reference value of ∫ bump² computed once with a fine trapezoid rule.
        let mut reference = 0.0;
        let n = 1 << 16;
        let h = 2.0 / n as f64;
        for i in 0..n {
            let x = -1.0 + (i as f64 + 0.5) * h;
            reference += bump(x) * bump(x) * h;
        }
        assert!((u.l2_norm_sq() - reference).abs() < 1e-10);
    }

    #[test]
    fn clearance_flags_wide_supports() {
        let meta = GridMeta::new(1, 256, 4.0).unwrap();
        let narrow = GridFunction::sample_1d(meta, bump).unwrap();
        assert!(narrow.require_clearance().unwrap() >= 1.0);
        let wide = GridFunction::sample_1d(meta, |x| bump(x / 1.6)).unwrap();
        assert!(matches!(
            wide.require_clearance(),
            Err(SpectralError::SupportTooWide { .. })
        ));
        let empty = GridFunction::zeros(meta);
        assert!(matches!(empty.support_clearance(), Err(SpectralError::EmptySupport)));
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.grid");
        let meta = GridMeta::new(2, 16, 3.0).unwrap();
        let u = GridFunction::sample_2d(meta, |x, y| bump(x) * bump(y) + 0.1 * x).unwrap();
        u.save_binary(&path).unwrap();
        let back = GridFunction::load_binary(&path).unwrap();
        assert_eq!(u, back);
    }

    #[test]
    fn csv_round_trip_recovers_shape_and_values() {
        let meta = GridMeta::new(1, 64, 4.0).unwrap();
        let u = GridFunction::sample_1d(meta, bump).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.meta(), meta);
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-16);
        }

        let meta2 = GridMeta::new(2, 8, 2.0).unwrap();
        let v = GridFunction::sample_2d(meta2, |x, y| x + 2.0 * y).unwrap();
        let mut buf = Vec::new();
        v.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.meta(), meta2);
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.grid");
        let meta = GridMeta::new(1, 16, 1.0).unwrap();
        GridFunction::zeros(meta).save_binary(&path).unwrap();
        let len = std::fs::metadata(&path).unwrap().len();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..len as usize - 8]).unwrap();
        assert!(GridFunction::load_binary(&path).is_err());
    }
}
