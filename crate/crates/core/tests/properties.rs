//! Property tests for the analytic invariants.

use gfi_core::measure::{BallMeasure, SmoothedMeasure};
use gfi_core::transport::{alpha, omega, omega_inv};
use proptest::prelude::*;

fn arb_measure_1d() -> impl Strategy<Value = SmoothedMeasure> {
    (
        prop::collection::vec((-2.0f64..2.0, 0.05f64..1.0), 1..6),
        0.3f64..2.0,
    )
        .prop_map(|(atoms_weights, delta)| {
            let total: f64 = atoms_weights.iter().map(|(_, w)| w).sum();
            let atoms: Vec<Vec<f64>> = atoms_weights.iter().map(|(a, _)| vec![*a]).collect();
            let weights: Vec<f64> = atoms_weights.iter().map(|(_, w)| w / total).collect();
            SmoothedMeasure::new(BallMeasure::new(atoms, weights).unwrap(), delta).unwrap()
        })
}

proptest! {
    #[test]
    fn omega_inverse_round_trips(u in -100.0f64..100.0) {
        let v = omega_inv(omega(u));
        prop_assert!((v - u).abs() <= 1e-12 * (1.0 + u.abs()));
    }

    #[test]
    fn omega_is_odd_and_increasing(u in -50.0f64..50.0, h in 1e-6f64..1.0) {
        prop_assert!((omega(-u) + omega(u)).abs() <= 1e-12 * (1.0 + omega(u).abs()));
        prop_assert!(omega(u + h) > omega(u));
    }

    #[test]
    fn alpha_supermultiplicative(a in -20.0f64..20.0, u in -20.0f64..20.0) {
        prop_assert!(alpha(a * u) >= alpha(a) * alpha(u) - 1e-12 * (1.0 + alpha(a) * alpha(u)));
    }

    #[test]
    fn hessian_envelope_holds(sm in arb_measure_1d(), z in -8.0f64..8.0) {
        let d2 = sm.delta() * sm.delta();
        let r = sm.radius();
        let h = sm.hessian_potential(&[z]).unwrap()[0][0];
        prop_assert!(h >= 1.0 / d2 - r * r / (d2 * d2) - 1e-9, "h = {h}");
        prop_assert!(h <= 1.0 / d2 + 1e-9, "h = {h}");
    }

    #[test]
    fn gradient_perturbation_is_lipschitz_bounded(sm in arb_measure_1d(), z in -20.0f64..20.0) {
        let d2 = sm.delta() * sm.delta();
        let g = sm.grad_potential(&[z]).unwrap()[0];
        let w_part = (g - z / d2).abs();
        prop_assert!(w_part <= sm.radius() / d2 + 1e-9);
    }

    #[test]
    fn rescale_density_relation(sm in arb_measure_1d(), z in -3.0f64..3.0, s in 0.2f64..4.0) {
        let rs = sm.rescale(s).unwrap();
        let lhs = rs.density(&[z]).unwrap();
        let rhs = s * sm.density(&[s * z]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn measure_text_round_trip(sm in arb_measure_1d()) {
        let text = sm.to_text();
        let back = SmoothedMeasure::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
    }
}
