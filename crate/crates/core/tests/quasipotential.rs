use levy_core::models::{LevyMeasure, LevyTriplet};
use levy_core::quasipotential::{assemble_truncated_generator, build_quasipotential, inverse_residual, DomainDelta};

fn catalog() -> Vec<(&'static str, LevyTriplet)> {
    let t = |a: f64, g: f64, m: LevyMeasure| LevyTriplet::new(a, g, m).unwrap();
    vec![
        ("brownian", LevyTriplet::brownian(1.0)),
        ("brownian_drift", LevyTriplet::brownian(0.5).with_drift(0.7)),
        ("stable_0.5", LevyTriplet::stable(0.5, 1.0, 1.0)),
        ("cauchy", LevyTriplet::cauchy()),
        ("stable_1.5_skew", LevyTriplet::stable(1.5, 1.0, 0.3)),
        ("stable_1.9", LevyTriplet::stable(1.9, 0.5, 0.5)),
        ("damped_1.3", t(0.0, 0.2, LevyMeasure::DampedStable { alpha: 1.3, c1: 1.0, c2: 0.5, lambda1: 1.0, lambda2: 2.0 })),
        ("variance_gamma", t(0.1, 0.0, LevyMeasure::VarianceGamma { c1: 1.0, c2: 1.0, g: 1.0, m: 2.0 })),
        ("nig", t(0.0, 0.0, LevyMeasure::Nig { c: 1.0, beta: 0.3 })),
        ("meixner", t(0.0, 0.0, LevyMeasure::Meixner { c: 1.0, beta: 0.5 })),
    ]
}

#[test]
fn kernels_are_nonnegative_with_zero_boundary_rows() {
    let d = DomainDelta::interval(-1.0, 1.0).unwrap();
    for (name, t) in catalog() {
        let l = assemble_truncated_generator(&t, &d, 401).unwrap();
        let k = build_quasipotential(&l).unwrap();
        assert!(k.relative_minimum() >= -1e-8, "{name}: {}", k.relative_minimum());
        assert_eq!(k.boundary_max(), 0.0, "{name}");
        assert!(k.regularity.pass, "{name}");
        assert!(inverse_residual(&l, &k) < 1e-8, "{name}");
    }
}
