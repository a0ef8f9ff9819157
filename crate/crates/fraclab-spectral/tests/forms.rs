//! Cross-route checks: the transform realization against the pointwise
//! quadrature evaluator, the Plancherel energy against the direct double
//! sum, and the comparison inequalities on a genuinely anisotropic family.

use fraclab_kernel::{apply_lms, QuadratureSpec, SmoothField};
use fraclab_measures::{MeasureFamily, OrderMeasure, SphericalMeasure};
use fraclab_spectral::{
    comparison_suite, energy, energy_bruteforce_1d, x_norm, ComparisonParams, GridFunction,
    GridMeta, MultiplierGrid,
};

/// Largest relative deviation between the spectral application of the
/// operator and the certified pointwise quadrature, over interior nodes.
fn spectral_pointwise_deviation(nodes: usize, s: f64) -> f64 {
    let field = SmoothField::bump_1d();
    let sigma = SphericalMeasure::uniform(1).unwrap();
    let meta = GridMeta::new(1, nodes, 64.0).unwrap();
    let u = GridFunction::from_field(meta, &field).unwrap();
    let mult = MultiplierGrid::single(meta, &sigma, s).unwrap();
    let lu = fraclab_spectral::apply_spectral(&mult, &u).unwrap();

    let spec = QuadratureSpec::default();
    let dx = meta.dx();
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let mut pairs = Vec::new();
    for i in 0..10 {
        let target = -0.45 + 0.1 * i as f64;
        let j = ((target + 32.0) / dx).round() as usize;
        let x = meta.point(j)[0];
        let exact = apply_lms(&field, 1, s, &sigma, [x, 0.0], &spec).unwrap().value;
        scale = scale.max(exact.abs());
        pairs.push((lu.values()[j], exact));
    }
    for (got, exact) in pairs {
        worst = worst.max((got - exact).abs());
    }
    worst / scale
}

#[test]
fn spectral_application_matches_the_pointwise_evaluator() {
    let coarse = spectral_pointwise_deviation(16_384, 0.55);
    let fine = spectral_pointwise_deviation(32_768, 0.55);
    assert!(fine < 1e-4, "deviation after doubling: {fine:.3e} (coarse {coarse:.3e})");
    assert!(fine < 2.0 * coarse, "doubling must not degrade: {coarse:.3e} -> {fine:.3e}");
}

#[test]
fn brute_force_energy_matches_the_transform_route() {
    let meta = GridMeta::new(1, 32_768, 128.0).unwrap();
    let field = SmoothField::bump_1d();
    let u = GridFunction::from_field(meta, &field).unwrap();
    let sigma = SphericalMeasure::uniform(1).unwrap();
    for s in [0.25, 0.75] {
        let mult = MultiplierGrid::single(meta, &sigma, s).unwrap();
        let spectral = energy(&u, &u, &mult).unwrap();
        let brute = energy_bruteforce_1d(&u, 1, s).unwrap();
        let rel = ((brute.value - spectral) / spectral).abs();
        assert!(
            rel < 1e-3,
            "s={s}: brute {} vs spectral {spectral} (rel {rel:.2e})",
            brute.value
        );
        assert!(brute.singular_spread < 0.05, "s={s}: spread {}", brute.singular_spread);
    }
}

#[test]
fn dilation_scales_the_energy_by_the_order_power() {
    let meta = GridMeta::new(1, 32_768, 128.0).unwrap();
    let field = SmoothField::bump_1d();
    let wide = field.dilated(2.0).unwrap();
    let u = GridFunction::from_field(meta, &field).unwrap();
    let u_rho = GridFunction::from_field(meta, &wide).unwrap();
    for s in [0.25, 0.75] {
        let e = energy_bruteforce_1d(&u, 1, s).unwrap().value;
        let e_rho = energy_bruteforce_1d(&u_rho, 1, s).unwrap().value;
        let expected = 2f64.powf(2.0 * s - 1.0);
        let ratio = e / e_rho;
        assert!(
            ((ratio - expected) / expected).abs() < 1e-3,
            "s={s}: ratio {ratio} vs {expected}"
        );
    }
}

#[test]
fn comparison_bounds_hold_for_a_two_atom_family_in_the_plane() {
    let meta = GridMeta::new(2, 128, 8.0).unwrap();
    let u = GridFunction::from_field(meta, &SmoothField::tensor_bump_2d()).unwrap();
    let e1 = fraclab_measures::Direction::from_components(2, 1.0, 0.0).unwrap();
    let e2 = fraclab_measures::Direction::from_components(2, 0.0, 1.0).unwrap();
    let sigma = SphericalMeasure::atomic(vec![(e1, 0.5), (e2, 0.5)]).unwrap();
    let params = ComparisonParams {
        family: MeasureFamily::constant(sigma).unwrap(),
        s: 0.5,
        t: 0.25,
        gammas: vec![0.2, 0.5, 0.8],
    };
    let report = comparison_suite(&u, &params).unwrap();
    assert!(report.against_isotropic.holds);
    assert!(report.lambda0 > 0.4, "two crossed atoms stay elliptic: {}", report.lambda0);
    let reverse = report.against_anisotropic.expect("elliptic case keeps the reverse bound");
    assert!(reverse.holds);
    assert!(report.cross_order.holds);
    assert!(report.angular_ratio.is_finite() && report.angular_ratio > 0.0);
    for w in report.gamma_ratios.windows(2) {
        assert!(w[1].ratio > w[0].ratio, "ratios grow with the weight");
    }
}

#[test]
fn density_blocks_agree_with_a_simpson_oracle() {
    let meta = GridMeta::new(1, 1024, 8.0).unwrap();
    let u = GridFunction::from_field(meta, &SmoothField::bump_1d()).unwrap();
    let family = MeasureFamily::constant(SphericalMeasure::uniform(1).unwrap()).unwrap();
    let mu = OrderMeasure::from_parts(&[], &[], &[(0.3, 0.9, 1.0)], &[]).unwrap();
    let out = x_norm(&u, &mu, &family).unwrap();

    let sigma = SphericalMeasure::uniform(1).unwrap();
    let single = |s: f64| {
        let mult = MultiplierGrid::single(meta, &sigma, s).unwrap();
        energy(&u, &u, &mult).unwrap()
    };
    let (a, b, n) = (0.3f64, 0.9f64, 240usize);
    let h = (b - a) / n as f64;
    let mut simpson = single(a) + single(b);
    for i in 1..n {
        simpson += single(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    simpson *= h / 3.0;

    let rel = ((out.e_plus - simpson) / simpson).abs();
    assert!(rel < 1e-8, "block quadrature {} vs Simpson {simpson} (rel {rel:.2e})", out.e_plus);
    assert_eq!(out.blocks.len(), 1);
}

#[test]
fn energies_survive_a_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let meta = GridMeta::new(1, 512, 8.0).unwrap();
    let u = GridFunction::from_field(meta, &SmoothField::bump_1d()).unwrap();
    let sigma = SphericalMeasure::uniform(1).unwrap();
    let mult = MultiplierGrid::single(meta, &sigma, 0.5).unwrap();
    let before = energy(&u, &u, &mult).unwrap();

    let bin = dir.path().join("u.grid");
    u.save_binary(&bin).unwrap();
    let loaded = GridFunction::load_binary(&bin).unwrap();
    assert_eq!(energy(&loaded, &loaded, &mult).unwrap(), before);

    let csv = dir.path().join("u.csv");
    u.save_csv(&csv).unwrap();
    let from_csv = GridFunction::load_csv(&csv).unwrap();
    let after = energy(&from_csv, &from_csv, &mult).unwrap();
    assert!(((after - before) / before).abs() < 1e-12);
}
