//! End-to-end checks of the masked solvers: spectrum against the classical
//! membrane, the closed-form lower bounds, and the two nonlinear searches.

use approx::assert_relative_eq;
use fraclab_dirichlet::{
    eigenpairs, generalized_poincare_floor, jumping_functional, jumping_solve, linear_solve,
    poincare_constant, solve_mountain_pass, weak_equation_residual, DirichletError, DomainMask,
};
use fraclab_measures::{MeasureFamily, OrderMeasure, Part, SphericalMeasure};
use fraclab_spectral::{energy, GridFunction, GridMeta, MultiplierGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line_family() -> MeasureFamily {
    MeasureFamily::constant(SphericalMeasure::uniform(1).unwrap()).unwrap()
}

fn random_masked(mask: &DomainMask, rng: &mut ChaCha8Rng) -> GridFunction {
    let mut u = GridFunction::zeros(mask.meta());
    for &idx in mask.indices() {
        u.values_mut()[idx] = rng.gen_range(-1.0..1.0);
    }
    u
}

#[test]
fn ground_state_of_the_unit_interval_matches_the_membrane() {
    let meta = GridMeta::new(1, 512, 4.0).unwrap();
    let sigma = SphericalMeasure::uniform(1).unwrap();
    let mult = MultiplierGrid::single(meta, &sigma, 1.0).unwrap();
    let mask = DomainMask::interval(meta, 0.0, 1.0).unwrap();
    let out = eigenpairs(&mult, &mask, 4).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert_relative_eq!(out.eigenvalues[0], pi2, max_relative = 0.02);
    assert_relative_eq!(out.eigenvalues[3], 16.0 * pi2, max_relative = 0.02);
    for (lam, res) in out.eigenvalues.iter().zip(&out.residuals) {
        assert!(*res <= 1e-8 * lam);
    }
}

#[test]
fn the_poincare_bound_holds_at_each_order() {
    let meta = GridMeta::new(1, 512, 4.0).unwrap();
    let sigma = SphericalMeasure::uniform(1).unwrap();
    let mask = DomainMask::interval(meta, 0.0, 1.0).unwrap();
    for s in [0.25, 0.5, 0.75, 1.5] {
        let c = poincare_constant(s, mask.diameter());
        let expected = if s < 1.0 { 8.0 } else { 512.0 / 36.0 };
        assert_relative_eq!(c, expected, max_relative = 1e-12);
        let mult = MultiplierGrid::single(meta, &sigma, s).unwrap();
        let out = eigenpairs(&mult, &mask, 1).unwrap();
        assert!(
            out.eigenvalues[0] * c >= 1.0,
            "s = {s}: lambda_1 = {} below 1/{c}",
            out.eigenvalues[0]
        );
    }
}

#[test]
fn superposed_orders_respect_the_window_floor() {
    let meta = GridMeta::new(1, 512, 4.0).unwrap();
    let mu = OrderMeasure::from_pos_atoms(&[(0.5, 1.0), (1.0, 1.0)]).unwrap();
    let family = line_family();
    let mult = MultiplierGrid::superposition(meta, &mu, &family).unwrap();
    let mask = DomainMask::interval(meta, 0.0, 1.0).unwrap();
    assert_eq!(mu.mass_closed(Part::Plus, 0.5, 1.0), 2.0);
    let floor = generalized_poincare_floor(&mu, 0.5, 1.0, mask.diameter());
    let out = eigenpairs(&mult, &mask, 4).unwrap();
    for phi in &out.eigenvectors {
        let e = energy(phi, phi, &mult).unwrap();
        assert!(e >= floor * phi.l2_norm_sq() - 1e-12);
    }
}

#[test]
fn shrinking_the_domain_raises_the_ground_state() {
    let meta = GridMeta::new(1, 512, 8.0).unwrap();
    let sigma = SphericalMeasure::uniform(1).unwrap();
    let mult = MultiplierGrid::single(meta, &sigma, 0.5).unwrap();
    let mut last = 0.0;
    for half in [1.5, 1.0, 0.5] {
        let mask = DomainMask::interval(meta, -half, half).unwrap();
        let lam = eigenpairs(&mult, &mask, 1).unwrap().eigenvalues[0];
        assert!(lam > last, "half-width {half} gave {lam} <= {last}");
        last = lam;
    }
}

#[test]
fn solving_at_an_eigenpair_recovers_the_eigenvector() {
    let meta = GridMeta::new(1, 512, 4.0).unwrap();
    let sigma = SphericalMeasure::uniform(1).unwrap();
    let mult = MultiplierGrid::single(meta, &sigma, 1.0).unwrap();
    let mask = DomainMask::interval(meta, 0.0, 1.0).unwrap();
    let out = eigenpairs(&mult, &mask, 1).unwrap();
    let lam = out.eigenvalues[0];
    let phi = &out.eigenvectors[0];
    let mut f = phi.clone();
    for v in f.values_mut() {
        *v *= lam;
    }
    let sol = linear_solve(&mult, &mask, &f, 1e-12).unwrap();
    let diff: f64 = sol
        .solution
        .values()
        .iter()
        .zip(phi.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        * meta.cell_volume();
    assert!(diff.sqrt() < 1e-6, "distance {}", diff.sqrt());
    assert_relative_eq!(sol.energy, lam, max_relative = 1e-8);
}

#[test]
fn mountain_pass_meets_its_certificates_with_a_small_negative_part() {
    let meta = GridMeta::new(1, 512, 8.0).unwrap();
    let mu = OrderMeasure::from_parts(&[(0.5, 1.0)], &[(0.25, 0.05)], &[], &[]).unwrap();
    let family = line_family();
    let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
    let sol = solve_mountain_pass(&mu, &family, &mask, 4.0, 1e-6, None).unwrap();

    assert!(sol.result.residual <= 1e-6);
    assert!(sol.result.energy > 0.0, "pass level {}", sol.result.energy);
    assert!(sol.nehari_mismatch <= 1e-8);
    assert!(sol.certificate.beta > 0.0);
    assert!(sol.certificate.far_level < 0.0);
    assert!(sol.certificate.far_energy > sol.certificate.rho);

    let mult = MultiplierGrid::superposition(meta, &mu, &family).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let phi = random_masked(&mask, &mut rng);
        let r = weak_equation_residual(&mult, &mask, &sol.result.solution, 4.0, &phi).unwrap();
        assert!(r <= 1e-5, "weak residual {r}");
    }
}

#[test]
fn jumping_gradient_survives_a_signed_measure() {
    let meta = GridMeta::new(1, 256, 8.0).unwrap();
    let mu = OrderMeasure::from_parts(&[(0.5, 1.0)], &[(0.25, 0.05)], &[], &[]).unwrap();
    let family = line_family();
    let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
    let w = meta.cell_volume();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let u = random_masked(&mask, &mut rng);
        let phi = random_masked(&mask, &mut rng);
        let (_, grad) = jumping_functional(&mu, &family, &mask, 1.1, 0.6, 4.0, &u).unwrap();
        let pairing: f64 =
            w * grad.values().iter().zip(phi.values()).map(|(g, p)| g * p).sum::<f64>();
        let eps = 1e-5;
        let at = |sign: f64| {
            let mut v = u.clone();
            for (vi, pi) in v.values_mut().iter_mut().zip(phi.values()) {
                *vi += sign * eps * pi;
            }
            jumping_functional(&mu, &family, &mask, 1.1, 0.6, 4.0, &v).unwrap().0
        };
        let fd = (at(1.0) - at(-1.0)) / (2.0 * eps);
        assert!((pairing - fd).abs() / fd.abs().max(1e-10) < 1e-6);
    }
}

#[test]
fn unequal_rates_still_admit_a_candidate_below_the_cap() {
    let meta = GridMeta::new(1, 512, 8.0).unwrap();
    let mu = OrderMeasure::dirac(0.5).unwrap();
    let family = line_family();
    let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
    let mult = MultiplierGrid::superposition(meta, &mu, &family).unwrap();
    let lam = eigenpairs(&mult, &mask, 2).unwrap().eigenvalues;
    let gap = lam[1] - lam[0];
    let out = jumping_solve(
        &mu,
        &family,
        &mask,
        lam[0] + 0.25 * gap,
        lam[0] + 0.55 * gap,
        2,
        4.0,
        1e-6,
    )
    .unwrap();
    assert!(out.converged, "residual {}", out.result.residual);
    assert!(out.result.residual <= 1e-6);
    assert!(out.result.solution.l2_norm_sq() > 1e-8);
    assert_eq!(out.level.below, Some(true));
    assert!(out.level.candidate_level > 0.0);
}

#[test]
fn a_dominant_negative_order_is_refused_everywhere() {
    let meta = GridMeta::new(1, 256, 8.0).unwrap();
    let mu = OrderMeasure::from_parts(&[(1.0, 1.0)], &[(0.5, 0.9)], &[], &[]).unwrap();
    let family = line_family();
    let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
    let mult = MultiplierGrid::superposition(meta, &mu, &family).unwrap();
    assert!(mult.has_negative());

    let f = GridFunction::sample_1d(meta, |x| (1.0 - x * x).max(0.0)).unwrap();
    let outcomes: [DirichletError; 4] = [
        linear_solve(&mult, &mask, &f, 1e-8).unwrap_err(),
        eigenpairs(&mult, &mask, 2).unwrap_err(),
        solve_mountain_pass(&mu, &family, &mask, 4.0, 1e-6, None).unwrap_err(),
        jumping_solve(&mu, &family, &mask, 1.0, 1.0, 2, 4.0, 1e-6).unwrap_err(),
    ];
    for err in outcomes {
        assert!(matches!(err, DirichletError::IndefiniteForm { .. }));
        let text = err.to_string();
        assert!(text.contains("indefinite"), "diagnostic was: {text}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn random_sources_solve_to_tolerance(coeffs in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let meta = GridMeta::new(1, 256, 8.0).unwrap();
        let sigma = SphericalMeasure::uniform(1).unwrap();
        let mult = MultiplierGrid::single(meta, &sigma, 0.5).unwrap();
        let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
        let mut f = GridFunction::zeros(meta);
        for (j, &c) in coeffs.iter().enumerate() {
            let idx = mask.indices()[j * mask.len() / coeffs.len()];
            f.values_mut()[idx] = c;
        }
        let bnorm = f.l2_norm_sq().sqrt();
        prop_assume!(bnorm > 1e-3);
        let sol = linear_solve(&mult, &mask, &f, 1e-10).unwrap();
        prop_assert!(sol.residual <= 1e-10 * bnorm);
        // the solve is a Galerkin projection: the source pairing equals the energy
        let w = meta.cell_volume();
        let pairing: f64 = w * sol.solution.values().iter()
            .zip(f.values())
            .map(|(u, s)| u * s)
            .sum::<f64>();
        prop_assert!((pairing - sol.energy).abs() <= 1e-8 * pairing.abs().max(1.0));
    }
}
