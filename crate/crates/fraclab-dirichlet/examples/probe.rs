use fraclab_dirichlet::{eigenpairs, jumping_solve, solve_mountain_pass, DomainMask};
use fraclab_measures::{MeasureFamily, OrderMeasure, SphericalMeasure};
use fraclab_spectral::{GridMeta, MultiplierGrid};

fn main() {
    let family = MeasureFamily::constant(SphericalMeasure::uniform(1).unwrap()).unwrap();

    let meta = GridMeta::new(1, 512, 8.0).unwrap();
    let mask = DomainMask::interval(meta, -1.0, 1.0).unwrap();
    let mu = OrderMeasure::dirac(0.5).unwrap();
    let mult = MultiplierGrid::superposition(meta, &mu, &family).unwrap();
    let spec = eigenpairs(&mult, &mask, 3).unwrap();
    let (l1, l2, l3) = (spec.eigenvalues[0], spec.eigenvalues[1], spec.eigenvalues[2]);
    println!("lambda {l1:.4} {l2:.4} {l3:.4}");
    let gap = l2 - l1;
    for (a, b) in [(l1 + 0.25 * gap, l1 + 0.55 * gap), (l1 + 0.4 * gap, l1 + 0.4 * gap)] {
        let t0 = std::time::Instant::now();
        let out = jumping_solve(&mu, &family, &mask, a, b, 2, 4.0, 1e-6).unwrap();
        println!(
            "a={a:.3} b={b:.3} conv={} res={:.2e} att={} level={:.4} c*={:.4} below={:?} t={:?}",
            out.converged,
            out.result.residual,
            out.attempts,
            out.level.candidate_level,
            out.level.c_star.unwrap(),
            out.level.below,
            t0.elapsed()
        );
    }

    let mp_mu = OrderMeasure::from_parts(&[(0.5, 1.0)], &[(0.25, 0.05)], &[], &[]).unwrap();
    let t0 = std::time::Instant::now();
    let sol = solve_mountain_pass(&mp_mu, &family, &mask, 4.0, 1e-6, None).unwrap();
    println!(
        "mp res={:.2e} J={:.5} nehari={:.2e} steps={} t={:?}",
        sol.result.residual,
        sol.result.energy,
        sol.nehari_mismatch,
        sol.result.trace.len(),
        t0.elapsed()
    );
}
