use levy_core::kernels::{build_kernel, stable_k0};
use levy_core::LevyTriplet;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stable_k0_sign_follows_alpha(alpha in 0.2f64..1.9, c1 in 0.0f64..2.0, c2 in 0.01f64..2.0, y in -5.0f64..5.0) {
        prop_assume!((alpha - 1.0).abs() > 1e-3 && y.abs() > 1e-6);
        let v = stable_k0(alpha, c1, c2, y);
        if alpha > 1.0 { prop_assert!(v >= 0.0) } else { prop_assert!(v <= 0.0) }
    }

    #[test]
    fn sign_part_is_a_constant_jump(alpha in 0.3f64..1.8, c1 in 0.1f64..2.0, c2 in 0.1f64..2.0, y in 0.01f64..4.0) {
        let k = build_kernel(&LevyTriplet::stable(alpha, c1, c2)).unwrap();
        prop_assert!((k.k(y) - k.k0(y) - 0.5 * k.sign_coeff).abs() <= 1e-12 * (1.0 + k.k(y).abs()));
        prop_assert!((k.k(-y) - k.k0(-y) + 0.5 * k.sign_coeff).abs() <= 1e-12 * (1.0 + k.k(-y).abs()));
    }

    #[test]
    fn symmetric_stable_kernel_is_even(alpha in 0.3f64..1.8, c in 0.1f64..2.0, y in 0.01f64..4.0) {
        let k = build_kernel(&LevyTriplet::stable(alpha, c, c)).unwrap();
        prop_assert!((k.k0(y) - k.k0(-y)).abs() <= 1e-12 * (1.0 + k.k0(y).abs()));
    }
}

#[test]
fn cauchy_kernel_is_logarithmic() {
    let k = build_kernel(&LevyTriplet::stable(1.0, 1.0, 1.0)).unwrap();
    for y in [0.1, 0.5, 2.0, 7.0] {
        assert!((k.k0(y) - k.k0(1.0) + y.ln()).abs() < 1e-12);
    }
}
