//! Probability measures on the unit sphere of R^N (N = 1, 2): angular
//! moments, maximizing directions, ellipticity constants and the
//! order-integrated measure built from a family of spherical measures.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::order::{OrderMeasure, Part};
use crate::{MeasureError, Result};

const MASS_TOL: f64 = 1e-12;
/// Nodes of the periodic trapezoid rule kept as a cross-check route on S^1.
pub const TRAPEZOID_NODES: usize = 4096;
/// Resolution of the angular scan used by the maximizer search (0.5 degree).
const SCAN_POINTS: usize = 720;
/// Golden-section refinement steps inside the best scan cell.
const REFINE_STEPS: usize = 40;

/// Unit vector in R^N, N ∈ {1, 2}. For N = 1 the only values are ±1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    dim: u8,
    v: [f64; 2],
}

impl Direction {
    /// Direction on the 0-sphere, i.e. the sign +1 or -1.
    pub fn from_sign(sign: f64) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(MeasureError::BadDirection(sign.abs()));
        }
        Ok(Self { dim: 1, v: [sign, 0.0] })
    }

    /// Direction on the circle given by its angle.
    pub fn from_angle(phi: f64) -> Self {
        Self { dim: 2, v: [phi.cos(), phi.sin()] }
    }

    /// Direction from raw components; the norm must be 1 within 1e-12.
    pub fn from_components(dim: u8, x: f64, y: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(MeasureError::UnsupportedDimension(dim));
        }
        let norm = if dim == 1 { x.abs() } else { x.hypot(y) };
        if (norm - 1.0).abs() > MASS_TOL {
            return Err(MeasureError::BadDirection(norm));
        }
        let v = if dim == 1 { [x, 0.0] } else { [x, y] };
        Ok(Self { dim, v })
    }

    /// First coordinate axis in the given dimension.
    pub fn axis(dim: u8) -> Result<Self> {
        match dim {
            1 => Direction::from_sign(1.0),
            2 => Ok(Direction::from_angle(0.0)),
            d => Err(MeasureError::UnsupportedDimension(d)),
        }
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn components(&self) -> [f64; 2] {
        self.v
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.v[0] * other.v[0] + self.v[1] * other.v[1]
    }

    /// Canonical angle in [0, 2π); signs map to 0 and π.
    pub fn angle(&self) -> f64 {
        let a = self.v[1].atan2(self.v[0]);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }
}

/// Flattened view of a spherical measure: weighted atoms plus (for N = 2)
/// uniformly distributed components. Weights of a valid measure sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    UniformCircle,
    Atom(Direction),
}

/// Probability measure on S^{N-1}: the angular factor of the jump kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum SphericalMeasure {
    /// Normalized surface measure. For N = 1 this is (δ_{+1} + δ_{-1})/2.
    UniformSurface { dim: u8 },
    /// Finitely many weighted unit directions.
    Atomic { atoms: Vec<(Direction, f64)> },
    /// Convex combination of spherical measures of the same dimension.
    Mixture { parts: Vec<(f64, SphericalMeasure)> },
}

impl SphericalMeasure {
    pub fn uniform(dim: u8) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(MeasureError::UnsupportedDimension(dim));
        }
        Ok(SphericalMeasure::UniformSurface { dim })
    }

    /// Single atom δ_θ.
    pub fn atom(direction: Direction) -> Self {
        SphericalMeasure::Atomic { atoms: vec![(direction, 1.0)] }
    }

    pub fn atomic(atoms: Vec<(Direction, f64)>) -> Result<Self> {
        let m = SphericalMeasure::Atomic { atoms };
        m.validate()?;
        Ok(m)
    }

    pub fn mixture(parts: Vec<(f64, SphericalMeasure)>) -> Result<Self> {
        let m = SphericalMeasure::Mixture { parts };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> u8 {
        match self {
            SphericalMeasure::UniformSurface { dim } => *dim,
            SphericalMeasure::Atomic { atoms } => {
                atoms.first().map(|(d, _)| d.dim()).unwrap_or(0)
            }
            SphericalMeasure::Mixture { parts } => {
                parts.first().map(|(_, m)| m.dim()).unwrap_or(0)
            }
        }
    }

    /// Total mass; 1 for a valid measure.
    pub fn mass(&self) -> f64 {
        match self {
            SphericalMeasure::UniformSurface { .. } => 1.0,
            SphericalMeasure::Atomic { atoms } => atoms.iter().map(|(_, w)| w).sum(),
            SphericalMeasure::Mixture { parts } => {
                parts.iter().map(|(c, m)| c * m.mass()).sum()
            }
        }
    }

    /// Checks the probability-measure invariants: unit directions, nonnegative
    /// weights, total mass 1 within 1e-12, consistent dimension.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim != 1 && dim != 2 {
            return Err(MeasureError::UnsupportedDimension(dim));
        }
        self.validate_inner(dim)?;
        let mass = self.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(MeasureError::NotProbability(mass));
        }
        if let SphericalMeasure::Mixture { parts } = self {
            let csum: f64 = parts.iter().map(|(c, _)| c).sum();
            if (csum - 1.0).abs() > MASS_TOL {
                return Err(MeasureError::MixtureWeights(csum));
            }
        }
        Ok(())
    }

    fn validate_inner(&self, dim: u8) -> Result<()> {
        match self {
            SphericalMeasure::UniformSurface { dim: d } => {
                if *d != dim {
                    return Err(MeasureError::MixedDimensions);
                }
            }
            SphericalMeasure::Atomic { atoms } => {
                if atoms.is_empty() {
                    return Err(MeasureError::Empty("atomic"));
                }
                for (d, w) in atoms {
                    if d.dim() != dim {
                        return Err(MeasureError::MixedDimensions);
                    }
                    if *w < 0.0 {
                        return Err(MeasureError::NegativeWeight(*w));
                    }
                    let norm = if dim == 1 {
                        d.v[0].abs()
                    } else {
                        d.v[0].hypot(d.v[1])
                    };
                    if (norm - 1.0).abs() > MASS_TOL {
                        return Err(MeasureError::NotUnit(norm));
                    }
                }
            }
            SphericalMeasure::Mixture { parts } => {
                if parts.is_empty() {
                    return Err(MeasureError::Empty("mixture"));
                }
                for (c, m) in parts {
                    if *c < 0.0 {
                        return Err(MeasureError::NegativeWeight(*c));
                    }
                    if m.dim() != dim {
                        return Err(MeasureError::MixedDimensions);
                    }
                    // inner parts must themselves be probability measures
                    m.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Flattens mixtures into weighted atomic / uniform components.
    pub fn components(&self) -> Vec<(f64, Component)> {
        let mut out = Vec::new();
        self.push_components(1.0, &mut out);
        out
    }

    fn push_components(&self, scale: f64, out: &mut Vec<(f64, Component)>) {
        match self {
            SphericalMeasure::UniformSurface { dim: 1 } => {
                for sign in [1.0, -1.0] {
                    out.push((
                        0.5 * scale,
                        Component::Atom(Direction::from_sign(sign).unwrap()),
                    ));
                }
            }
            SphericalMeasure::UniformSurface { .. } => {
                out.push((scale, Component::UniformCircle));
            }
            SphericalMeasure::Atomic { atoms } => {
                for (d, w) in atoms {
                    out.push((scale * w, Component::Atom(*d)));
                }
            }
            SphericalMeasure::Mixture { parts } => {
                for (c, m) in parts {
                    m.push_components(scale * c, out);
                }
            }
        }
    }
}

/// Mean of |cos φ|^α over the circle, evaluated in closed form.
///
/// Equals Γ((α+1)/2) / (√π · Γ(α/2 + 1)); for even α this is the familiar
/// central-binomial value (1/2 at α = 2, 3/8 at α = 4, ...).
pub fn uniform_circle_moment(alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    ((ln_gamma((alpha + 1.0) / 2.0) - ln_gamma(alpha / 2.0 + 1.0)).exp() / PI.sqrt()).min(1.0)
}

/// Same quantity by the periodic trapezoid rule, kept as an independent
/// route. Exact (to rounding) for even α; for non-even α the kinks at the
/// zeros of the cosine limit the accuracy to O(h^{1+α}).
pub fn uniform_circle_moment_trapezoid(alpha: f64, nodes: usize) -> f64 {
    let h = 2.0 * PI / nodes as f64;
    let sum: f64 = (0..nodes)
        .map(|j| (j as f64 * h).cos().abs().powf(alpha))
        .sum();
    sum / nodes as f64
}

/// Angular moment ∫ |e·θ|^α σ(dθ), a value in [0, 1].
pub fn angular_moment(sigma: &SphericalMeasure, e: &Direction, alpha: f64) -> Result<f64> {
    if alpha < 0.0 {
        return Err(MeasureError::NegativeExponent(alpha));
    }
    if e.dim() != sigma.dim() {
        return Err(MeasureError::MixedDimensions);
    }
    Ok(moment_unchecked(sigma, e, alpha).clamp(0.0, 1.0))
}

fn moment_unchecked(sigma: &SphericalMeasure, e: &Direction, alpha: f64) -> f64 {
    match sigma {
        SphericalMeasure::UniformSurface { dim: 1 } => 1.0,
        SphericalMeasure::UniformSurface { .. } => uniform_circle_moment(alpha),
        SphericalMeasure::Atomic { atoms } => atoms
            .iter()
            .map(|(theta, w)| {
                let t = e.dot(theta).abs();
                if alpha == 0.0 {
                    *w
                } else {
                    w * t.powf(alpha)
                }
            })
            .sum(),
        SphericalMeasure::Mixture { parts } => parts
            .iter()
            .map(|(c, m)| c * moment_unchecked(m, e, alpha))
            .sum(),
    }
}

/// Golden-section search on [a, b]; `maximize` flips the comparison.
/// Returns the best abscissa/value pair among all evaluated points.
fn golden_refine(
    a0: f64,
    b0: f64,
    steps: usize,
    maximize: bool,
    f: &dyn Fn(f64) -> f64,
) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let better = |x: f64, y: f64| if maximize { x > y } else { x < y };
    let (mut a, mut b) = (a0, b0);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = if better(fd, fc) { (d, fd) } else { (c, fc) };
    for _ in 0..steps {
        if better(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
            if better(fc, best.1) {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
            if better(fd, best.1) {
                best = (d, fd);
            }
        }
    }
    best
}

/// Scan plus local refinement of e ↦ ∫|e·θ|^α σ(dθ) over the circle.
/// `maximize = false` searches the minimum instead.
fn extremal_angle(sigma: &SphericalMeasure, alpha: f64, maximize: bool) -> (f64, f64) {
    let g = |phi: f64| moment_unchecked(sigma, &Direction::from_angle(phi), alpha);
    let step = 2.0 * PI / SCAN_POINTS as f64;
    let mut best_phi = 0.0;
    let mut best_val = g(0.0);
    for i in 1..SCAN_POINTS {
        let phi = i as f64 * step;
        let v = g(phi);
        let improves = if maximize { v > best_val } else { v < best_val };
        if improves {
            best_phi = phi;
            best_val = v;
        }
    }
    let (phi_r, val_r) = golden_refine(best_phi - step, best_phi + step, REFINE_STEPS, maximize, &g);
    // a refined point is only adopted on strict improvement, so exact ties
    // keep the lexicographically smallest scanned angle
    let improves = if maximize { val_r > best_val } else { val_r < best_val };
    let (mut phi, val) = if improves { (phi_r, val_r) } else { (best_phi, best_val) };
    // antipodal directions carry the same moment; report the angle in [0, π)
    phi = phi.rem_euclid(2.0 * PI);
    if phi >= PI {
        phi -= PI;
    }
    (phi, val.clamp(0.0, 1.0))
}

/// Global maximizer e_s of the angular moment with exponent 2s, with ties
/// broken by the smallest angle.
pub fn maximizing_direction(sigma: &SphericalMeasure, s: f64) -> Result<(Direction, f64)> {
    sigma.validate()?;
    let alpha = 2.0 * s;
    match sigma.dim() {
        1 => Ok((Direction::from_sign(1.0)?, 1.0)),
        2 => {
            let (phi, val) = extremal_angle(sigma, alpha, true);
            Ok((Direction::from_angle(phi), val))
        }
        d => Err(MeasureError::UnsupportedDimension(d)),
    }
}

/// Minimum of the angular moment over directions (the strong-ellipticity
/// side; 0 is possible for purely directional measures).
pub fn minimizing_value(sigma: &SphericalMeasure, alpha: f64) -> Result<f64> {
    sigma.validate()?;
    match sigma.dim() {
        1 => Ok(1.0),
        2 => Ok(extremal_angle(sigma, alpha, false).1),
        d => Err(MeasureError::UnsupportedDimension(d)),
    }
}

/// Piecewise-constant family s ↦ σ_s. Piece `i` applies on
/// [breakpoints[i-1], breakpoints[i]) with the convention that the first
/// piece starts at 0 and the last piece extends to infinity. At s = 0 the
/// family always reports the uniform surface measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFamily {
    breakpoints: Vec<f64>,
    pieces: Vec<SphericalMeasure>,
}

impl MeasureFamily {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<SphericalMeasure>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(MeasureError::PieceCount);
        }
        if breakpoints.iter().any(|b| !b.is_finite() || *b < 0.0)
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(MeasureError::BadBreakpoints);
        }
        let dim = pieces[0].dim();
        for p in &pieces {
            p.validate()?;
            if p.dim() != dim {
                return Err(MeasureError::MixedDimensions);
            }
        }
        Ok(Self { breakpoints, pieces })
    }

    /// Family that is the same measure at every order.
    pub fn constant(sigma: SphericalMeasure) -> Result<Self> {
        Self::new(Vec::new(), vec![sigma])
    }

    pub fn dim(&self) -> u8 {
        self.pieces[0].dim()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[SphericalMeasure] {
        &self.pieces
    }

    /// The measure acting at order s.
    pub fn sigma_at(&self, s: f64) -> SphericalMeasure {
        if s == 0.0 {
            return SphericalMeasure::UniformSurface { dim: self.dim() };
        }
        let idx = self.breakpoints.partition_point(|b| *b <= s);
        self.pieces[idx].clone()
    }

    /// Segments [lo, hi) of constancy intersected with [lo0, hi0), together
    /// with the measure on each. Used for exact order integration.
    pub fn segments_within(&self, lo0: f64, hi0: f64) -> Vec<(f64, f64, &SphericalMeasure)> {
        let mut cuts = vec![lo0];
        for b in &self.breakpoints {
            if *b > lo0 && *b < hi0 {
                cuts.push(*b);
            }
        }
        cuts.push(hi0);
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                let idx = self.breakpoints.partition_point(|b| *b <= w[0]);
                out.push((w[0], w[1], &self.pieces[idx]));
            }
        }
        out
    }
}

/// Ellipticity constants measured on a grid of orders, plus the maximizing
/// direction at each sampled order.
#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    /// inf over sampled s of the moment at its own maximizer.
    pub lambda: f64,
    /// inf over sampled s and over directions.
    pub lambda0: f64,
    /// inf over directions of the integrated-measure moment at order s_*.
    pub lambda_tilde: f64,
    pub maximizers: Vec<MaximizerEntry>,
    /// Whether lambda_tilde clears the positivity tolerance 1e-10.
    pub eass_satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximizerEntry {
    pub s: f64,
    pub direction: Direction,
    pub value: f64,
}

/// Integrated measure: the normalized average of σ_s over [s_*, t] weighted
/// by μ⁺, realized exactly as a finite mixture.
pub fn integrated_measure(
    family: &MeasureFamily,
    mu_plus: &OrderMeasure,
    s_star: f64,
    t: f64,
) -> Result<SphericalMeasure> {
    let z = mu_plus.mass_closed(Part::Plus, s_star, t);
    if z <= 0.0 {
        return Err(MeasureError::ZeroOrderMass(s_star, t));
    }
    let mut parts: Vec<(f64, SphericalMeasure)> = Vec::new();
    for &(s, w) in mu_plus.pos_atoms() {
        if s >= s_star && s <= t {
            parts.push((w, family.sigma_at(s)));
        }
    }
    for piece in mu_plus.pos_density() {
        let lo = piece.lo.max(s_star);
        let hi = piece.hi.min(t);
        if hi > lo && piece.value > 0.0 {
            for (a, b, sigma) in family.segments_within(lo, hi) {
                parts.push((piece.value * (b - a), sigma.clone()));
            }
        }
    }
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    for (w, _) in &mut parts {
        *w /= total;
    }
    let mixture = if parts.len() == 1 {
        parts.pop().unwrap().1
    } else {
        SphericalMeasure::Mixture { parts }
    };
    mixture.validate()?;
    Ok(mixture)
}

/// Measures λ, λ₀ and λ̃ on the given order grid.
pub fn ellipticity_report(
    family: &MeasureFamily,
    s_grid: &[f64],
    s_star: f64,
    t: f64,
    mu_plus: &OrderMeasure,
) -> Result<EllipticityReport> {
    if s_grid.is_empty() {
        return Err(MeasureError::Empty("order grid"));
    }
    let mut lambda = f64::INFINITY;
    let mut lambda0 = f64::INFINITY;
    let mut maximizers = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let sigma = family.sigma_at(s);
        let (e, value) = maximizing_direction(&sigma, s)?;
        lambda = lambda.min(value);
        lambda0 = lambda0.min(minimizing_value(&sigma, 2.0 * s)?);
        maximizers.push(MaximizerEntry { s, direction: e, value });
    }
    let tilde_sigma = integrated_measure(family, mu_plus, s_star, t)?;
    let lambda_tilde = minimizing_value(&tilde_sigma, 2.0 * s_star)?;
    Ok(EllipticityReport {
        lambda,
        lambda0,
        lambda_tilde,
        maximizers,
        eass_satisfied: lambda_tilde > 1e-10,
    })
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

/// Serialized form: directions are angles for N = 2 and signs for N = 1.
#[derive(Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
enum MeasureRepr {
    Uniform { dim: u8 },
    Atomic { dim: u8, atoms: Vec<(f64, f64)> },
    Mixture { parts: Vec<(f64, MeasureRepr)> },
}

impl From<&SphericalMeasure> for MeasureRepr {
    fn from(m: &SphericalMeasure) -> Self {
        match m {
            SphericalMeasure::UniformSurface { dim } => MeasureRepr::Uniform { dim: *dim },
            SphericalMeasure::Atomic { atoms } => {
                let dim = atoms.first().map(|(d, _)| d.dim()).unwrap_or(0);
                let atoms = atoms
                    .iter()
                    .map(|(d, w)| {
                        let coord = if d.dim() == 1 { d.v[0] } else { d.angle() };
                        (coord, *w)
                    })
                    .collect();
                MeasureRepr::Atomic { dim, atoms }
            }
            SphericalMeasure::Mixture { parts } => MeasureRepr::Mixture {
                parts: parts.iter().map(|(c, m)| (*c, MeasureRepr::from(m))).collect(),
            },
        }
    }
}

impl TryFrom<MeasureRepr> for SphericalMeasure {
    type Error = MeasureError;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        let m = match r {
            MeasureRepr::Uniform { dim } => SphericalMeasure::uniform(dim)?,
            MeasureRepr::Atomic { dim, atoms } => {
                let atoms = atoms
                    .into_iter()
                    .map(|(coord, w)| {
                        let d = match dim {
                            1 => Direction::from_sign(coord)?,
                            2 => Ok::<_, MeasureError>(Direction::from_angle(coord))?,
                            d => return Err(MeasureError::UnsupportedDimension(d)),
                        };
                        Ok((d, w))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SphericalMeasure::Atomic { atoms }
            }
            MeasureRepr::Mixture { parts } => {
                let parts = parts
                    .into_iter()
                    .map(|(c, m)| Ok((c, SphericalMeasure::try_from(m)?)))
                    .collect::<Result<Vec<_>>>()?;
                SphericalMeasure::Mixture { parts }
            }
        };
        m.validate()?;
        Ok(m)
    }
}

impl Serialize for SphericalMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SphericalMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MeasureRepr::deserialize(d)?;
        SphericalMeasure::try_from(repr).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    breakpoints: Vec<f64>,
    pieces: Vec<MeasureRepr>,
}

impl Serialize for MeasureFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyRepr {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(MeasureRepr::from).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasureFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FamilyRepr::deserialize(d)?;
        let pieces = repr
            .pieces
            .into_iter()
            .map(SphericalMeasure::try_from)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        MeasureFamily::new(repr.breakpoints, pieces).map_err(serde::de::Error::custom)
    }
}
