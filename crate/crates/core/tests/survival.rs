use levy_core::quasipotential::DomainDelta;
use levy_core::survival::{
    brownian_interval_survival, penalized_iterates, penalized_survival, survival_probability, PenalizedConfig, SurvivalConfig,
};
use levy_core::LevyTriplet;
use proptest::prelude::*;

const SMALL: SurvivalConfig = SurvivalConfig { n: 101, m: 7 };

fn times() -> Vec<f64> {
    (1..=8).map(|k| 0.25 * k as f64).collect()
}

#[test]
fn curves_are_probabilities_decreasing_in_time() {
    let d = DomainDelta::interval(-1.0, 1.0).unwrap();
    for t in [LevyTriplet::brownian(1.0), LevyTriplet::stable(1.5, 1.0, 0.5), LevyTriplet::cauchy()] {
        let c = survival_probability(&t, &d, 0.2, &times(), SMALL).unwrap();
        assert!(c.p.iter().all(|&p| (-1e-4..=1.0 + 1e-4).contains(&p)), "{:?}", c.p);
        assert!(c.p.windows(2).all(|w| w[1] <= w[0] + 1e-4), "{:?}", c.p);
    }
}

#[test]
fn brownian_curve_matches_the_reflection_series() {
    let d = DomainDelta::interval(-1.0, 1.0).unwrap();
    let c = survival_probability(&LevyTriplet::brownian(1.0), &d, 0.0, &times(), SurvivalConfig::default()).unwrap();
    for (t, p) in c.t.iter().zip(&c.p) {
        assert!((p - brownian_interval_survival(1.0, 1.0, *t)).abs() < 5e-3, "t={t}");
    }
}

#[test]
fn larger_domains_keep_the_process_longer() {
    let t = LevyTriplet::stable(1.5, 1.0, 1.0);
    let inner = survival_probability(&t, &DomainDelta::interval(-0.5, 0.5).unwrap(), 0.0, &[0.5], SMALL).unwrap().p[0];
    let outer = survival_probability(&t, &DomainDelta::interval(-1.0, 1.0).unwrap(), 0.0, &[0.5], SMALL).unwrap().p[0];
    let split = DomainDelta::new(vec![(-0.5, 0.5), (0.8, 1.5)]).unwrap();
    let two = survival_probability(&t, &split, 0.0, &[0.5], SMALL).unwrap().p[0];
    let hull = survival_probability(&t, &DomainDelta::interval(-0.5, 1.5).unwrap(), 0.0, &[0.5], SMALL).unwrap().p[0];
    assert!(outer > inner);
    assert!(two > inner - 1e-3, "{two} vs {inner}");
    assert!(two < hull + 1e-3, "{two} vs {hull}");
}

#[test]
fn starting_near_the_boundary_lowers_survival() {
    let d = DomainDelta::interval(-1.0, 1.0).unwrap();
    for t in [LevyTriplet::brownian(1.0), LevyTriplet::cauchy()] {
        let centre = survival_probability(&t, &d, 0.0, &times(), SMALL).unwrap();
        let edge = survival_probability(&t, &d, 0.9, &times(), SMALL).unwrap();
        assert!(edge.p.iter().zip(&centre.p).all(|(e, c)| e < c), "{:?} vs {:?}", edge.p, centre.p);
    }
}

#[test]
fn penalized_route_agrees_with_the_resolvent_route_for_cauchy() {
    let d = DomainDelta::interval(-1.0, 1.0).unwrap();
    let qp = survival_probability(&LevyTriplet::cauchy(), &d, 0.0, &[1.0], SurvivalConfig::default()).unwrap().p[0];
    let pen = penalized_survival(&LevyTriplet::cauchy(), &d, 0.0, 50.0, &[1.0], PenalizedConfig::default()).unwrap().p[0];
    assert!(pen > qp && pen - qp < 0.03, "{pen} vs {qp}");
}

#[test]
fn invalid_requests_are_rejected() {
    let d = DomainDelta::interval(-1.0, 1.0).unwrap();
    let b = LevyTriplet::brownian(1.0);
    assert!(survival_probability(&b, &d, 2.0, &[1.0], SMALL).map(|c| c.p[0] == 0.0).unwrap_or(true));
    assert!(penalized_iterates(&b, &d, 0.0, -1.0, 1.0, PenalizedConfig::default()).is_err());
    assert!(penalized_iterates(&b, &d, 0.0, 1.0, 0.0, PenalizedConfig::default()).is_err());
    assert!(DomainDelta::interval(1.0, -1.0).is_err());
    assert!(DomainDelta::new(vec![(-1.0, 0.5), (0.0, 1.0)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn survival_is_translation_covariant(delta in -3.0f64..3.0, x0 in -0.8f64..0.8) {
        let t = LevyTriplet::stable(1.5, 1.0, 0.5);
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        let a = survival_probability(&t, &d, x0, &[0.7], SMALL).unwrap().p[0];
        let b = survival_probability(&t, &d.shifted(delta), x0 + delta, &[0.7], SMALL).unwrap().p[0];
        prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn penalized_mass_decreases_with_the_penalty(u1 in 0.0f64..5.0, du in 0.1f64..5.0) {
        let t = LevyTriplet::stable(1.5, 1.0, 1.0);
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        let cfg = PenalizedConfig { steps: 32, ..Default::default() };
        let a = penalized_survival(&t, &d, 0.0, u1, &[1.0], cfg).unwrap().p[0];
        let b = penalized_survival(&t, &d, 0.0, u1 + du, &[1.0], cfg).unwrap().p[0];
        prop_assert!(b <= a + 1e-8, "{b} > {a}");
        prop_assert!(a <= 1.0 + 1e-8 && b >= -1e-8);
    }
}
