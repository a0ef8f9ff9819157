//! Bounded domains as node masks inside the periodic box.

use fraclab_spectral::{GridFunction, GridMeta};

use crate::{DirichletError, Result};

/// A bounded open set Ω realized as the grid nodes it contains. The mask
/// carries the continuum diameter for the Poincaré constants and keeps Ω a
/// quarter box length away from the periodic boundary, so wrap-around
/// interactions stay behind the same clearance the energy oracles use.
#[derive(Debug, Clone)]
pub struct DomainMask {
    meta: GridMeta,
    inside: Vec<bool>,
    indices: Vec<usize>,
    diameter: f64,
}

impl DomainMask {
    /// The interval (a, b) on a one-dimensional grid.
    pub fn interval(meta: GridMeta, a: f64, b: f64) -> Result<Self> {
        if meta.dim() != 1 {
            return Err(DirichletError::GridMismatch(meta, meta));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(DirichletError::EmptyDomain);
        }
        let mask = Self::collect(meta, b - a, |x| a < x[0] && x[0] < b)?;
        mask.check_margin(a.abs().max(b.abs()))?;
        Ok(mask)
    }

    /// The open disk around `center` on a planar grid.
    pub fn disk(meta: GridMeta, center: [f64; 2], radius: f64) -> Result<Self> {
        if meta.dim() != 2 {
            return Err(DirichletError::GridMismatch(meta, meta));
        }
        if !(radius > 0.0) {
            return Err(DirichletError::EmptyDomain);
        }
        let mask = Self::collect(meta, 2.0 * radius, |x| {
            (x[0] - center[0]).hypot(x[1] - center[1]) < radius
        })?;
        let reach = center[0].abs().max(center[1].abs()) + radius;
        mask.check_margin(reach)?;
        Ok(mask)
    }

    /// An arbitrary node set. The diameter is measured from the selected
    /// nodes and padded by one cell diagonal, an upper bound on the
    /// continuum diameter, which keeps the Poincaré constants conservative.
    pub fn from_predicate(
        meta: GridMeta,
        predicate: impl Fn([f64; 2]) -> bool,
    ) -> Result<Self> {
        let mask = Self::collect(meta, 0.0, predicate)?;
        let mut reach: f64 = 0.0;
        let mut diameter: f64 = 0.0;
        let pts: Vec<[f64; 2]> = mask.indices.iter().map(|&i| meta.point(i)).collect();
        for (i, p) in pts.iter().enumerate() {
            reach = reach.max(p[0].abs()).max(p[1].abs());
            for q in &pts[i + 1..] {
                diameter = diameter.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        let pad = meta.dx() * (meta.dim() as f64).sqrt();
        let mask = Self { diameter: diameter + pad, ..mask };
        mask.check_margin(reach)?;
        Ok(mask)
    }

    fn collect(
        meta: GridMeta,
        diameter: f64,
        predicate: impl Fn([f64; 2]) -> bool,
    ) -> Result<Self> {
        let total = meta.total_nodes();
        let mut inside = vec![false; total];
        let mut indices = Vec::new();
        for idx in 0..total {
            if predicate(meta.point(idx)) {
                inside[idx] = true;
                indices.push(idx);
            }
        }
        if indices.is_empty() {
            return Err(DirichletError::EmptyDomain);
        }
        Ok(Self { meta, inside, indices, diameter })
    }

    fn check_margin(&self, reach: f64) -> Result<()> {
        let clearance = self.meta.length() / 2.0 - reach;
        let required = self.meta.length() / 4.0;
        if clearance + 1e-12 < required {
            return Err(DirichletError::DomainTooWide { clearance, required });
        }
        Ok(())
    }

    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    /// Number of nodes inside Ω, the dimension of the masked subspace.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// |Ω| measured as the covered cell volume.
    pub fn volume(&self) -> f64 {
        self.indices.len() as f64 * self.meta.cell_volume()
    }

    /// Zeroes a field outside Ω.
    pub fn restrict(&self, u: &GridFunction) -> Result<GridFunction> {
        if u.meta() != self.meta {
            return Err(DirichletError::GridMismatch(u.meta(), self.meta));
        }
        let mut out = u.clone();
        for (idx, v) in out.values_mut().iter_mut().enumerate() {
            if !self.inside[idx] {
                *v = 0.0;
            }
        }
        Ok(out)
    }

    /// Checks the exterior condition exactly.
    pub fn vanishes_outside(&self, u: &GridFunction) -> Result<()> {
        if u.meta() != self.meta {
            return Err(DirichletError::GridMismatch(u.meta(), self.meta));
        }
        for (idx, v) in u.values().iter().enumerate() {
            if !self.inside[idx] && *v != 0.0 {
                return Err(DirichletError::OutsideSupport { index: idx });
            }
        }
        Ok(())
    }

    /// Gathers the interior values into a dense coordinate vector.
    pub fn pack(&self, u: &GridFunction) -> Vec<f64> {
        self.indices.iter().map(|&i| u.values()[i]).collect()
    }

    /// Scatters a coordinate vector back onto the grid, zero outside Ω.
    pub fn unpack(&self, v: &[f64]) -> GridFunction {
        let mut u = GridFunction::zeros(self.meta);
        for (&idx, &val) in self.indices.iter().zip(v) {
            u.values_mut()[idx] = val;
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn an_interval_collects_its_nodes() {
        let meta = GridMeta::new(1, 64, 8.0).unwrap();
        let mask = DomainMask::interval(meta, 0.0, 1.0).unwrap();
        assert_eq!(mask.len(), 8 - 1);
        assert_eq!(mask.diameter(), 1.0);
        assert!((mask.volume() - mask.len() as f64 * 0.125).abs() < 1e-15);
        for &idx in mask.indices() {
            let x = meta.point(idx)[0];
            assert!(0.0 < x && x < 1.0);
        }
    }

    #[test]
    fn domains_near_the_boundary_are_rejected() {
        let meta = GridMeta::new(1, 64, 8.0).unwrap();
        assert!(matches!(
            DomainMask::interval(meta, 0.0, 3.0),
            Err(DirichletError::DomainTooWide { .. })
        ));
        assert!(matches!(
            DomainMask::interval(meta, 5.0, 6.0),
            Err(DirichletError::EmptyDomain)
        ));
    }

    #[test]
    fn restriction_and_the_exterior_check_agree() {
        let meta = GridMeta::new(1, 64, 8.0).unwrap();
        let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
        let u = GridFunction::sample_1d(meta, |x| (2.25 - x * x).max(0.0)).unwrap();
        assert!(mask.vanishes_outside(&u).is_err());
        let r = mask.restrict(&u).unwrap();
        mask.vanishes_outside(&r).unwrap();
        let packed = mask.pack(&r);
        let back = mask.unpack(&packed);
        assert_eq!(back.values(), r.values());
    }

    #[test]
    fn a_disk_keeps_its_continuum_diameter() {
        let meta = GridMeta::new(2, 32, 8.0).unwrap();
        let mask = DomainMask::disk(meta, [0.0, 0.0], 1.0).unwrap();
        assert_eq!(mask.diameter(), 2.0);
        assert!(mask.len() > 30);
    }

    #[test]
    fn predicate_masks_measure_their_own_diameter() {
        let meta = GridMeta::new(1, 128, 8.0).unwrap();
        let mask = DomainMask::from_predicate(meta, |x| x[0].abs() < 0.5).unwrap();
        assert!(mask.diameter() >= 1.0 - 2.0 * meta.dx());
        assert!(mask.diameter() <= 1.0 + 2.0 * meta.dx());
    }
}
