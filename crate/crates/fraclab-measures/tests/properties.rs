use fraclab_measures::{
    angular_moment, maximizing_direction, sphere, Direction, MeasureFamily, OrderMeasure, Part,
    SphericalMeasure,
};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn arb_direction() -> impl Strategy<Value = Direction> {
    (0.0..TAU).prop_map(Direction::from_angle)
}

fn arb_atomic() -> impl Strategy<Value = SphericalMeasure> {
    prop::collection::vec(((0.0..TAU), (0.05..1.0f64)), 1..6).prop_map(|raw| {
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        let atoms = raw
            .into_iter()
            .map(|(phi, w)| (Direction::from_angle(phi), w / total))
            .collect();
        SphericalMeasure::atomic(atoms).expect("normalized atomic measure")
    })
}

fn arb_measure() -> impl Strategy<Value = SphericalMeasure> {
    prop_oneof![
        Just(SphericalMeasure::uniform(2).unwrap()),
        arb_atomic(),
        (arb_atomic(), 0.05..0.95f64).prop_map(|(atomic, c)| {
            SphericalMeasure::mixture(vec![
                (c, atomic),
                (1.0 - c, SphericalMeasure::uniform(2).unwrap()),
            ])
            .expect("two-part mixture")
        }),
    ]
}

fn arb_order_measure() -> impl Strategy<Value = OrderMeasure> {
    (
        prop::collection::vec(((0.0..3.0f64), (0.01..2.0f64)), 1..5),
        prop::collection::vec(((0.0..2.0f64), (0.1..1.5f64), (0.05..1.0f64)), 0..3),
    )
        .prop_map(|(atoms, raw_density)| {
            let density: Vec<(f64, f64, f64)> = raw_density
                .into_iter()
                .map(|(lo, len, v)| (lo, lo + len, v))
                .collect();
            OrderMeasure::from_parts(&atoms, &[], &density, &[]).expect("valid order measure")
        })
}

proptest! {
    #[test]
    fn moments_stay_in_unit_interval(
        sigma in arb_measure(),
        e in arb_direction(),
        alpha in 0.0..6.0f64,
    ) {
        let m = angular_moment(&sigma, &e, alpha).unwrap();
        prop_assert!((0.0..=1.0).contains(&m), "moment {m} outside [0, 1]");
    }

    #[test]
    fn moment_is_monotone_in_the_exponent(
        sigma in arb_measure(),
        e in arb_direction(),
        alpha in 0.0..4.0f64,
        step in 0.01..2.0f64,
    ) {
        // |e·θ| ≤ 1 makes larger exponents smaller
        let lo = angular_moment(&sigma, &e, alpha).unwrap();
        let hi = angular_moment(&sigma, &e, alpha + step).unwrap();
        prop_assert!(hi <= lo + 1e-12, "exponent {alpha}+{step}: {hi} > {lo}");
    }

    #[test]
    fn maximizer_dominates_random_probes(
        sigma in arb_measure(),
        s in 0.05..2.0f64,
        probes in prop::collection::vec(0.0..TAU, 8),
    ) {
        let (_, best) = maximizing_direction(&sigma, s).unwrap();
        for phi in probes {
            let m = angular_moment(&sigma, &Direction::from_angle(phi), 2.0 * s).unwrap();
            prop_assert!(
                best + 0.02 >= m,
                "probe at {phi} gives {m}, search found {best}"
            );
        }
    }

    #[test]
    fn mixture_moment_is_the_convex_combination(
        a in arb_atomic(),
        b in arb_atomic(),
        c in 0.05..0.95f64,
        e in arb_direction(),
        alpha in 0.0..5.0f64,
    ) {
        let mix = SphericalMeasure::mixture(vec![(c, a.clone()), (1.0 - c, b.clone())]).unwrap();
        let lhs = angular_moment(&mix, &e, alpha).unwrap();
        let rhs = c * angular_moment(&a, &e, alpha).unwrap()
            + (1.0 - c) * angular_moment(&b, &e, alpha).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn spherical_json_roundtrip(sigma in arb_measure()) {
        let text = serde_json::to_string(&sigma).unwrap();
        let back: SphericalMeasure = serde_json::from_str(&text).unwrap();
        let e = Direction::from_angle(0.123);
        let a = angular_moment(&sigma, &e, 1.7).unwrap();
        let b = angular_moment(&back, &e, 1.7).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn order_mass_is_additive_over_adjacent_windows(
        mu in arb_order_measure(),
        cuts in prop::collection::vec(0.0..4.0f64, 3),
    ) {
        let mut c = cuts;
        c.sort_by(f64::total_cmp);
        let (a, b, d) = (c[0], c[1], c[2]);
        let whole = mu.mass(Part::Plus, a, d);
        let split = mu.mass(Part::Plus, a, b) + mu.mass(Part::Plus, b, d);
        prop_assert!((whole - split).abs() <= 1e-12 * (1.0 + whole));
    }

    #[test]
    fn closed_window_adds_exactly_the_edge_atoms(
        mu in arb_order_measure(),
        a in 0.0..1.0f64,
        b in 1.0..4.0f64,
    ) {
        let edge: f64 = mu
            .pos_atoms()
            .iter()
            .filter(|(s, _)| *s == b)
            .map(|(_, w)| w)
            .sum();
        let diff = mu.mass_closed(Part::Plus, a, b) - mu.mass(Part::Plus, a, b);
        prop_assert!((diff - edge).abs() <= 1e-15);
    }

    #[test]
    fn order_json_roundtrip(mu in arb_order_measure()) {
        let text = serde_json::to_string(&mu).unwrap();
        let back: OrderMeasure = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(mu, back);
    }

    #[test]
    fn family_segments_cover_the_window(
        bps in prop::collection::vec(0.1..3.0f64, 0..4),
        lo in 0.0..1.5f64,
        len in 0.01..2.0f64,
    ) {
        let mut b = bps;
        b.sort_by(f64::total_cmp);
        b.dedup();
        let pieces = vec![SphericalMeasure::uniform(2).unwrap(); b.len() + 1];
        let family = MeasureFamily::new(b, pieces).unwrap();
        let hi = lo + len;
        let segments = family.segments_within(lo, hi);
        let covered: f64 = segments.iter().map(|(a, b, _)| b - a).sum();
        prop_assert!((covered - len).abs() <= 1e-12);
        for w in segments.windows(2) {
            prop_assert!(w[0].1 <= w[1].0 + 1e-15);
        }
    }
}

#[test]
fn ellipticity_constants_are_ordered() {
    let family = MeasureFamily::new(
        vec![0.75],
        vec![
            SphericalMeasure::mixture(vec![
                (0.5, SphericalMeasure::uniform(2).unwrap()),
                (0.5, SphericalMeasure::atom(Direction::from_angle(0.4))),
            ])
            .unwrap(),
            SphericalMeasure::uniform(2).unwrap(),
        ],
    )
    .unwrap();
    let mu = OrderMeasure::from_pos_atoms(&[(0.5, 1.0), (1.0, 0.5)]).unwrap();
    let report =
        sphere::ellipticity_report(&family, &[0.25, 0.5, 1.0, 1.5], 0.5, 1.0, &mu).unwrap();
    assert!(report.lambda0 <= report.lambda + 1e-12);
    assert!(report.lambda <= 1.0 + 1e-12);
    assert!(report.lambda > 0.0);
    assert!(report.lambda_tilde > 0.0 && report.eass_satisfied);
    assert_eq!(report.maximizers.len(), 4);
}
