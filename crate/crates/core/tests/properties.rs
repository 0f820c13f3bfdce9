//! Property tests for the crate-wide invariants that hold across the whole
//! parameter space rather than at hand-picked points.

use proptest::prelude::*;

use pinney_core::asymptotics::{fit_a0_t0, AsymptoticSolution};
use pinney_core::frequency::FrequencyProfile;
use pinney_core::ode::PinneyParams;

fn profile_strategy() -> impl Strategy<Value = FrequencyProfile<f64>> {
    prop_oneof![
        (0.5f64..2.0).prop_map(|o| FrequencyProfile::constant(o).unwrap()),
        (0.5f64..2.0).prop_map(|o| FrequencyProfile::decaying(o).unwrap()),
        (0.5f64..2.0).prop_map(|o| FrequencyProfile::growing(o).unwrap()),
        ((0.5f64..2.0), (0.05f64..0.95))
            .prop_map(|(o, g)| FrequencyProfile::oscillating(o, g).unwrap()),
    ]
}

proptest! {
    #[test]
    fn phase_integral_additive_and_positive(
        profile in profile_strategy(),
        eps in 0.0f64..0.2,
        a in -20.0f64..60.0,
        span1 in 0.0f64..40.0,
        span2 in 0.0f64..40.0,
    ) {
        let b = a + span1;
        let c = b + span2;
        let full = profile.phase_integral(eps, a, c).unwrap();
        let split = profile.phase_integral(eps, a, b).unwrap()
            + profile.phase_integral(eps, b, c).unwrap();
        prop_assert!((full - split).abs() < 1e-9, "additivity off by {}", full - split);
        if c > a {
            prop_assert!(full > 0.0, "integral of a positive frequency must be positive");
        }
        // Signed integral flips with the bounds.
        let reversed = profile.phase_integral(eps, c, a).unwrap();
        prop_assert!((full + reversed).abs() < 1e-9);
    }

    #[test]
    fn zeroth_order_positive_with_consistent_derivative(
        profile in profile_strategy(),
        eps in 0.0f64..0.2,
        k in 0.25f64..4.0,
        a0 in 0.0f64..5.0,
        phi in 0.0f64..std::f64::consts::TAU,
        t in 0.5f64..50.0,
    ) {
        let params = PinneyParams::new(eps, k, profile).unwrap();
        let sol = AsymptoticSolution::new(params, a0, 0.0, phi).unwrap();
        let (x, v) = sol.eval_x0(t).unwrap();
        prop_assert!(x > 0.0, "x0 must stay positive for k > 0");
        prop_assert!(v.is_finite());
        let h = 1e-5;
        let fd = (sol.eval_x0(t + h).unwrap().0 - sol.eval_x0(t - h).unwrap().0) / (2.0 * h);
        prop_assert!(
            (v - fd).abs() < 1e-4 * v.abs().max(1.0),
            "analytic {v} vs finite difference {fd}"
        );
    }

    #[test]
    fn initial_condition_fit_round_trips(
        eps in 0.0f64..0.15,
        a0 in 0.1f64..5.0,
        phi in 0.0f64..6.2,
    ) {
        let params =
            PinneyParams::new(eps, 1.0, FrequencyProfile::constant(1.0).unwrap()).unwrap();
        let sol = AsymptoticSolution::new(params.clone(), a0, 0.0, phi).unwrap();
        let (x, v) = sol.eval_x0(0.0).unwrap();
        let (a0_fit, t0_fit, phi_fit) = fit_a0_t0(&params, x, v).unwrap();
        prop_assert_eq!(t0_fit, 0.0);
        prop_assert!(
            (a0_fit - a0).abs() < 1e-6 * a0.max(1.0),
            "A0 {} -> {}", a0, a0_fit
        );
        let tau = std::f64::consts::TAU;
        let dphi = (phi_fit - phi).rem_euclid(tau);
        prop_assert!(dphi.min(tau - dphi) < 1e-6, "phi {} -> {}", phi, phi_fit);
    }
}
