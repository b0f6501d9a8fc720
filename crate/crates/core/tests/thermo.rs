use hydrochain::thermo::{self, Lambda, MacroState};
use hydrochain::{Error, Potential};
use proptest::prelude::*;

fn pots() -> [Potential; 3] {
    [Potential::Harmonic, Potential::Coslattice { a: 0.5 }, Potential::Fpu { b: 0.3 }]
}

#[test]
fn harmonic_closed_forms() {
    let pot = Potential::Harmonic;
    for &(tau, v, beta) in &[(0.0, 0.0, 1.0), (1.5, -0.5, 0.3), (-2.0, 1.0, 3.0)] {
        let lam = Lambda::from_tension(tau, v, beta);
        let theta = (std::f64::consts::TAU / beta).ln() + beta * (tau * tau + v * v) / 2.0;
        assert!((thermo::partition_log(lam, &pot).unwrap() - theta).abs() < 1e-11);
        let u = thermo::grad_theta(lam, &pot).unwrap();
        assert!((u.r_bar - tau).abs() < 1e-11 && (u.p_bar - v).abs() < 1e-11);
        assert!((u.e_int() - (tau * tau / 2.0 + 1.0 / beta)).abs() < 1e-11);
        let h = thermo::hessian_theta(lam, &pot).unwrap();
        assert!((h[0][0] - 1.0 / beta).abs() < 1e-10 && (h[1][1] - 1.0 / beta).abs() < 1e-10);
    }
}

#[test]
fn inadmissible_and_divergent_inputs() {
    let pot = Potential::Coslattice { a: 0.5 };
    let floor = pot.value(0.8);
    assert!(matches!(thermo::invert(MacroState::from_internal(0.8, 0.0, floor), &pot), Err(Error::NotAdmissible(_))));
    assert!(matches!(thermo::invert(MacroState::from_internal(0.8, 0.0, floor - 0.1), &pot), Err(Error::NotAdmissible(_))));
    assert!(matches!(thermo::partition_log(Lambda::new(1.0, 0.0, 0.0), &pot), Err(Error::NonConvergent { .. })));
    assert!(matches!(thermo::partition_log(Lambda::new(1.0, 0.0, -1.0), &pot), Err(Error::NonConvergent { .. })));
}

#[test]
fn phi_gradient_is_lambda() {
    let pot = Potential::Coslattice { a: 0.5 };
    let u = MacroState::new(0.6, 0.2, 1.7);
    let lam = thermo::invert_to_lambda(u, &pot).unwrap();
    let h = 1e-5;
    let base = u.conserved();
    for c in 0..3 {
        let mut a = base;
        let mut b = base;
        a[c] += h;
        b[c] -= h;
        let d = (thermo::legendre_phi(MacroState::from_conserved(a), &pot).unwrap()
            - thermo::legendre_phi(MacroState::from_conserved(b), &pot).unwrap())
            / (2.0 * h);
        assert!((d - lam.to_array()[c]).abs() < 1e-6, "component {c}: {d} vs {:?}", lam);
    }
}

#[test]
fn sound_speed_from_implicit_and_difference_partials_agree() {
    let pot = Potential::Coslattice { a: 0.5 };
    for &(r, e) in &[(0.0, 0.8), (0.9, 1.4), (-1.2, 1.5)] {
        let inv = thermo::invert(MacroState::from_internal(r, 0.0, e), &pot).unwrap();
        let (p, pr, pe) = inv.tension_gradient();
        let c_imp = thermo::sound_speed_sq_from(p, pr, pe).sqrt();
        let c = thermo::sound_speed(r, e, &pot).unwrap();
        assert!((c - c_imp).abs() < 1e-6, "{c} vs {c_imp}");
    }
}

#[test]
fn rate_function_vanishes_only_at_mean() {
    let pot = Potential::Coslattice { a: 0.5 };
    let lam = Lambda::from_tension(0.5, 0.1, 1.3);
    let mean = thermo::grad_theta(lam, &pot).unwrap();
    assert!(thermo::rate_function(mean, lam, &pot).unwrap().abs() < 1e-9);
    for d in [0.05, -0.1, 0.3] {
        let x = MacroState::new(mean.r_bar + d, mean.p_bar, mean.e_tot + d.abs());
        assert!(thermo::rate_function(x, lam, &pot).unwrap() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn duality_round_trip(tau in -2.0f64..2.0, v in -1.0f64..1.0, beta in 0.25f64..4.0, k in 0usize..3) {
        let pot = pots()[k];
        let lam = Lambda::from_tension(tau, v, beta);
        let u = thermo::grad_theta(lam, &pot).unwrap();
        let back = thermo::invert_to_lambda(u, &pot).unwrap();
        prop_assert!((back.l1 - lam.l1).abs() < 1e-8 * lam.l1.abs().max(1.0));
        prop_assert!((back.l2 - lam.l2).abs() < 1e-8 * lam.l2.abs().max(1.0));
        prop_assert!((back.l3 - lam.l3).abs() < 1e-8 * lam.l3.max(1.0));
    }

    #[test]
    fn hessian_is_positive_definite(tau in -2.0f64..2.0, v in -1.0f64..1.0, beta in 0.25f64..4.0, k in 0usize..3) {
        let h = thermo::hessian_theta(Lambda::from_tension(tau, v, beta), &pots()[k]).unwrap();
        // leading principal minors
        let m1 = h[0][0];
        let m2 = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let m3 = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
            + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
        prop_assert!(m1 > 0.0 && m2 > 0.0 && m3 > 0.0);
    }

    #[test]
    fn tension_is_lambda_ratio(tau in -2.0f64..2.0, beta in 0.25f64..4.0, k in 0usize..3) {
        let pot = pots()[k];
        let u = thermo::grad_theta(Lambda::from_tension(tau, 0.0, beta), &pot).unwrap();
        let p = thermo::tension(u.r_bar, u.e_int(), &pot).unwrap();
        prop_assert!((p - tau).abs() < 1e-8 * tau.abs().max(1.0));
    }
}
