//! Signed measures on the order half-line [0, ∞): finitely many atoms plus a
//! piecewise-constant density in each of the positive and negative parts.
//!
//! Interval masses are computed over half-open windows [a, b) so that masses
//! over adjacent windows add exactly, also in the presence of atoms sitting
//! on window edges. Closed-window masses are available separately where an
//! inclusive right endpoint is wanted.

use serde::{Deserialize, Serialize};

use crate::{MeasureError, Result};

/// Selects the positive or the negative part of a signed order measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Plus,
    Minus,
}

/// One constant-density piece on [lo, hi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl DensityPiece {
    fn overlap(&self, a: f64, b: f64) -> f64 {
        let lo = self.lo.max(a);
        let hi = self.hi.min(b);
        if hi > lo {
            self.value * (hi - lo)
        } else {
            0.0
        }
    }
}

/// Signed measure of orders, μ = μ⁺ − μ⁻.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderMeasure {
    pos_atoms: Vec<(f64, f64)>,
    neg_atoms: Vec<(f64, f64)>,
    pos_density: Vec<DensityPiece>,
    neg_density: Vec<DensityPiece>,
}

/// Selects the series reported by the summability probe built on the
/// reference bump φ and its squeezed copy ψ = φ(2·):
/// squared norms Σ ‖D^kφ‖²/k², the self-normalized bump series
/// Σ ‖D^kφ‖/(c_k k²) (identically Σ 1/k²), or the self-normalized squeezed
/// series Σ ‖D^kψ‖/(c_k k²), whose terms grow geometrically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathologicalKind {
    NormSquared,
    SelfNormalized,
    Squeezed,
}

fn clean_atoms(raw: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let mut atoms = Vec::with_capacity(raw.len());
    for &(s, w) in raw {
        if !s.is_finite() || !w.is_finite() {
            return Err(MeasureError::OrderMeasure(format!(
                "non-finite atom ({s}, {w})"
            )));
        }
        if s < 0.0 {
            return Err(MeasureError::OrderMeasure(format!("negative order {s}")));
        }
        if w < 0.0 {
            return Err(MeasureError::NegativeWeight(w));
        }
        if w > 0.0 {
            atoms.push((s, w));
        }
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    // merge coincident orders so the representation is canonical
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (s, w) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == s => last.1 += w,
            _ => merged.push((s, w)),
        }
    }
    Ok(merged)
}

fn clean_density(raw: &[(f64, f64, f64)]) -> Result<Vec<DensityPiece>> {
    let mut pieces = Vec::with_capacity(raw.len());
    for &(lo, hi, value) in raw {
        if !lo.is_finite() || !hi.is_finite() || !value.is_finite() {
            return Err(MeasureError::OrderMeasure(format!(
                "non-finite density piece ({lo}, {hi}, {value})"
            )));
        }
        if lo < 0.0 || hi <= lo {
            return Err(MeasureError::OrderMeasure(format!(
                "bad density window [{lo}, {hi})"
            )));
        }
        if value < 0.0 {
            return Err(MeasureError::NegativeWeight(value));
        }
        if value > 0.0 {
            pieces.push(DensityPiece { lo, hi, value });
        }
    }
    pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    Ok(pieces)
}

impl OrderMeasure {
    pub fn from_parts(
        pos_atoms: &[(f64, f64)],
        neg_atoms: &[(f64, f64)],
        pos_density: &[(f64, f64, f64)],
        neg_density: &[(f64, f64, f64)],
    ) -> Result<Self> {
        let m = OrderMeasure {
            pos_atoms: clean_atoms(pos_atoms)?,
            neg_atoms: clean_atoms(neg_atoms)?,
            pos_density: clean_density(pos_density)?,
            neg_density: clean_density(neg_density)?,
        };
        if m.pos_atoms.is_empty()
            && m.neg_atoms.is_empty()
            && m.pos_density.is_empty()
            && m.neg_density.is_empty()
        {
            return Err(MeasureError::Empty("order measure"));
        }
        Ok(m)
    }

    /// Purely atomic positive measure.
    pub fn from_pos_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::from_parts(atoms, &[], &[], &[])
    }

    /// Single unit atom δ_s, the plain fractional case.
    pub fn dirac(s: f64) -> Result<Self> {
        Self::from_pos_atoms(&[(s, 1.0)])
    }

    pub fn pos_atoms(&self) -> &[(f64, f64)] {
        &self.pos_atoms
    }

    pub fn neg_atoms(&self) -> &[(f64, f64)] {
        &self.neg_atoms
    }

    pub fn pos_density(&self) -> &[DensityPiece] {
        &self.pos_density
    }

    pub fn neg_density(&self) -> &[DensityPiece] {
        &self.neg_density
    }

    fn atoms(&self, part: Part) -> &[(f64, f64)] {
        match part {
            Part::Plus => &self.pos_atoms,
            Part::Minus => &self.neg_atoms,
        }
    }

    fn density(&self, part: Part) -> &[DensityPiece] {
        match part {
            Part::Plus => &self.pos_density,
            Part::Minus => &self.neg_density,
        }
    }

    /// Mass of the chosen part on the half-open window [a, b).
    pub fn mass(&self, part: Part, a: f64, b: f64) -> f64 {
        let atom_sum: f64 = self
            .atoms(part)
            .iter()
            .filter(|(s, _)| *s >= a && *s < b)
            .map(|(_, w)| w)
            .sum();
        let density_sum: f64 = self.density(part).iter().map(|p| p.overlap(a, b)).sum();
        atom_sum + density_sum
    }

    /// Mass on the closed window [a, b]; differs from `mass` only through
    /// atoms sitting exactly at b.
    pub fn mass_closed(&self, part: Part, a: f64, b: f64) -> f64 {
        let edge: f64 = self
            .atoms(part)
            .iter()
            .filter(|(s, _)| *s == b)
            .map(|(_, w)| w)
            .sum();
        self.mass(part, a, b) + edge
    }

    pub fn total_mass(&self, part: Part) -> f64 {
        let atom_sum: f64 = self.atoms(part).iter().map(|(_, w)| w).sum();
        let density_sum: f64 = self
            .density(part)
            .iter()
            .map(|p| p.value * (p.hi - p.lo))
            .sum();
        atom_sum + density_sum
    }

    pub fn signed_mass(&self, a: f64, b: f64) -> f64 {
        self.mass(Part::Plus, a, b) - self.mass(Part::Minus, a, b)
    }

    /// Supremum of the support of the chosen part.
    pub fn support_sup(&self, part: Part) -> Option<f64> {
        let atom_max = self.atoms(part).last().map(|(s, _)| *s);
        let density_max = self
            .density(part)
            .iter()
            .map(|p| p.hi)
            .fold(None, |acc: Option<f64>, hi| {
                Some(acc.map_or(hi, |a| a.max(hi)))
            });
        match (atom_max, density_max) {
            (Some(a), Some(d)) => Some(a.max(d)),
            (a, d) => a.or(d),
        }
    }

    pub fn support_inf(&self, part: Part) -> Option<f64> {
        let atom_min = self.atoms(part).first().map(|(s, _)| *s);
        let density_min = self.density(part).first().map(|p| p.lo);
        match (atom_min, density_min) {
            (Some(a), Some(d)) => Some(a.min(d)),
            (a, d) => a.or(d),
        }
    }

    /// Checks the structural assumptions at the split order s_*: the negative
    /// part must live strictly below s_*, the positive part must charge
    /// [s_*, ∞), and the mass ratio γ must stay below 1. Also reports the top
    /// positive order s_# and the associated critical exponent
    /// 2N/(N - 2 s_#), falling back to `p_fallback` when the dimension
    /// constraint N > 2 s_# fails.
    pub fn check_assumptions(
        &self,
        s_star: f64,
        dim: u8,
        p_fallback: f64,
    ) -> Result<AssumptionReport> {
        if !(s_star > 0.0) || !s_star.is_finite() {
            return Err(MeasureError::OrderMeasure(format!(
                "split order must be positive, got {s_star}"
            )));
        }
        let s_sharp = self
            .support_sup(Part::Plus)
            .ok_or(MeasureError::Empty("positive part"))?;
        let inf = f64::INFINITY;
        let pos_mass_above = self.mass(Part::Plus, s_star, inf);
        let pos_mass_below = self.mass(Part::Plus, 0.0, s_star);
        let neg_mass_below = self.mass(Part::Minus, 0.0, s_star);
        let neg_mass_above = self.mass(Part::Minus, s_star, inf);
        let gamma = if pos_mass_above > 0.0 {
            neg_mass_below / pos_mass_above
        } else {
            f64::INFINITY
        };
        let n = dim as f64;
        let critical_exponent = if n > 2.0 * s_sharp {
            2.0 * n / (n - 2.0 * s_sharp)
        } else {
            p_fallback
        };
        let satisfied = neg_mass_above == 0.0 && pos_mass_above > 0.0 && gamma < 1.0;
        Ok(AssumptionReport {
            s_star,
            s_sharp,
            pos_mass_above,
            pos_mass_below,
            neg_mass_below,
            neg_mass_above,
            gamma,
            critical_exponent,
            satisfied,
        })
    }
}

/// Outcome of the structural checks at a given split order.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub s_star: f64,
    /// Top of the positive support.
    pub s_sharp: f64,
    pub pos_mass_above: f64,
    pub pos_mass_below: f64,
    pub neg_mass_below: f64,
    pub neg_mass_above: f64,
    /// Ratio of the negative mass below s_* to the positive mass above.
    pub gamma: f64,
    pub critical_exponent: f64,
    pub satisfied: bool,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(default)]
struct OrderRepr {
    pos_atoms: Vec<(f64, f64)>,
    neg_atoms: Vec<(f64, f64)>,
    pos_density: Vec<(f64, f64, f64)>,
    neg_density: Vec<(f64, f64, f64)>,
}

impl Serialize for OrderMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OrderRepr {
            pos_atoms: self.pos_atoms.clone(),
            neg_atoms: self.neg_atoms.clone(),
            pos_density: self.pos_density.iter().map(|p| (p.lo, p.hi, p.value)).collect(),
            neg_density: self.neg_density.iter().map(|p| (p.lo, p.hi, p.value)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrderMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = OrderRepr::deserialize(d)?;
        OrderMeasure::from_parts(&r.pos_atoms, &r.neg_atoms, &r.pos_density, &r.neg_density)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mixed() -> OrderMeasure {
        OrderMeasure::from_parts(
            &[(0.5, 1.0), (1.5, 0.25)],
            &[(0.25, 0.4)],
            &[(1.0, 2.0, 0.1)],
            &[],
        )
        .unwrap()
    }

    #[test]
    fn half_open_windows_add_exactly() {
        let mu = mixed();
        let total = mu.mass(Part::Plus, 0.0, 3.0);
        let split = mu.mass(Part::Plus, 0.0, 1.5) + mu.mass(Part::Plus, 1.5, 3.0);
        assert_eq!(total, split);
        // the atom at 1.5 sits in the right window only
        assert_abs_diff_eq!(mu.mass(Part::Plus, 0.0, 1.5), 1.0 + 0.05, epsilon = 1e-15);
    }

    #[test]
    fn closed_window_includes_right_atom() {
        let mu = mixed();
        assert_abs_diff_eq!(
            mu.mass_closed(Part::Plus, 0.0, 1.5),
            1.0 + 0.05 + 0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn coincident_atoms_merge() {
        let mu = OrderMeasure::from_pos_atoms(&[(0.5, 0.25), (0.5, 0.75)]).unwrap();
        assert_eq!(mu.pos_atoms(), &[(0.5, 1.0)]);
    }

    #[test]
    fn support_bounds() {
        let mu = mixed();
        assert_eq!(mu.support_sup(Part::Plus), Some(2.0));
        assert_eq!(mu.support_inf(Part::Plus), Some(0.5));
        assert_eq!(mu.support_sup(Part::Minus), Some(0.25));
    }

    #[test]
    fn assumptions_hold_for_small_negative_part() {
        let mu = mixed();
        let report = mu.check_assumptions(0.5, 1, 6.0).unwrap();
        assert!(report.satisfied);
        assert_abs_diff_eq!(report.gamma, 0.4 / 1.35, epsilon = 1e-15);
        assert_eq!(report.s_sharp, 2.0);
        // dimension 1 with s_# = 2 forces the fallback exponent
        assert_eq!(report.critical_exponent, 6.0);
    }

    #[test]
    fn assumptions_fail_when_negative_part_reaches_above() {
        let mu = OrderMeasure::from_parts(&[(1.0, 1.0)], &[(0.9, 0.5)], &[], &[]).unwrap();
        let report = mu.check_assumptions(0.5, 1, 6.0).unwrap();
        assert!(!report.satisfied);
        assert!(report.neg_mass_above > 0.0);
    }

    #[test]
    fn critical_exponent_below_threshold() {
        let mu = OrderMeasure::dirac(0.25).unwrap();
        let report = mu.check_assumptions(0.2, 1, 6.0).unwrap();
        assert_abs_diff_eq!(report.critical_exponent, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn serde_roundtrip_preserves_masses() {
        let mu = mixed();
        let text = serde_json::to_string(&mu).unwrap();
        let back: OrderMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(mu, back);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(OrderMeasure::from_pos_atoms(&[(-0.5, 1.0)]).is_err());
        assert!(OrderMeasure::from_pos_atoms(&[(0.5, -1.0)]).is_err());
        assert!(OrderMeasure::from_parts(&[], &[], &[(1.0, 0.5, 1.0)], &[]).is_err());
        assert!(OrderMeasure::from_parts(&[], &[], &[], &[]).is_err());
    }
}
