use std::sync::Arc;

use proptest::prelude::*;
use qmctunnel::wkb::{
    action, landscape, momentum_k, splitting_closed_form, transit_time, turning_points, v_eff, velocity_nu,
    WkbProblem,
};
use qmctunnel::{CurieWeiss, Grover};

#[test]
fn action_is_twice_the_closed_form_exponent() {
    // Δ ∝ exp(-L a / 2) and Δ ∝ exp(-L c), so a(e₁, 1) = 2 c(Γ)
    for i in 2..=9 {
        let gamma = i as f64 / 10.0;
        let a = action(&WkbProblem::curie_weiss(gamma, 0.0, 1.0).unwrap()).unwrap();
        let c = splitting_closed_form(gamma, 1).unwrap().c;
        assert!((a / 2.0 - c).abs() < 1e-6, "Γ={gamma}: a/2={} c={c}", a / 2.0);
    }
}

#[test]
fn closed_form_exponent_at_one_half() {
    // c = ln((1 + r) / Γ) - r with r = √(1 - Γ²)
    let r = 0.75f64.sqrt();
    let c = splitting_closed_form(0.5f64, 1).unwrap().c;
    assert!((c - ((1.0 + r) / 0.5).ln() + r).abs() < 1e-13);
    assert!((c - 0.450_932_5).abs() < 1e-7);
}

#[test]
fn grover_action_is_log_two() {
    let a = action(&WkbProblem::grover(1.0).unwrap()).unwrap();
    assert!((a - 2f64.ln()).abs() < 1e-8);
}

#[test]
fn grover_momentum_and_velocity() {
    let p = WkbProblem::grover(1.0).unwrap();
    assert_eq!(momentum_k(&p, 0.0).unwrap(), 0.0);
    // cosh k = -(e + g) / (Γ √(ℓ² - m²))
    let k = momentum_k(&p, 0.5).unwrap();
    let via_cosh = (1.0 / 0.75f64.sqrt()).acosh();
    assert!((k - via_cosh).abs() < 1e-12);
    assert!((k - 0.5f64.atanh()).abs() < 1e-12);
    let nu = velocity_nu(&p, 0.5).unwrap();
    assert!((nu - 0.5).abs() < 1e-12);
    assert!((nu - 0.75f64.sqrt() * k.sinh()).abs() < 1e-12);
}

#[test]
fn transit_time_is_minus_energy_derivative_of_action() {
    for gamma in [0.3f64, 0.5] {
        let p = WkbProblem::curie_weiss(gamma, 0.0, 1.0).unwrap();
        let land = landscape(&p).unwrap();
        for frac in [0.2, 0.5, 0.8] {
            let e = land.extrema[0].e + frac * (land.extrema[1].e - land.extrema[0].e);
            let h = 1e-6;
            let up = action(&p.with_energy(e + h).unwrap()).unwrap();
            let down = action(&p.with_energy(e - h).unwrap()).unwrap();
            let t = transit_time(&p.with_energy(e).unwrap()).unwrap();
            assert!(((up - down) / (2.0 * h) + t).abs() < 1e-4, "Γ={gamma} frac={frac}");
        }
    }
}

#[test]
fn exit_point_reaches_the_edge_only_at_full_spin() {
    let (gamma, h) = (0.21f64, 0.1f64);
    for ell in [0.7, 0.85, 1.0] {
        let g = Arc::new(CurieWeiss { h });
        let p = WkbProblem::new(g, gamma, ell, 0.0).unwrap().at_metastable_minimum().unwrap();
        let (m1, m1p) = turning_points(&p).unwrap();
        assert!((v_eff(&p, m1).unwrap() - p.energy).abs() < 1e-10);
        assert!((v_eff(&p, m1p).unwrap() - p.energy).abs() < 1e-10);
        assert!(m1p < ell);
    }
    let p = WkbProblem::new(Arc::new(Grover), 1.0, 1.0, -1.0).unwrap();
    assert_eq!(turning_points(&p).unwrap().1, 1.0);
    let short = WkbProblem::new(Arc::new(Grover), 1.0, 0.9, -1.0).unwrap();
    assert!(turning_points(&short).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn velocity_times_momentum_slope_is_minus_one(gamma in 0.2f64..0.8, u in 0.05f64..0.95, frac in 0.1f64..0.9) {
        let p = WkbProblem::curie_weiss(gamma, 0.0, 1.0).unwrap();
        let land = landscape(&p).unwrap();
        let e = land.extrema[0].e + frac * (land.extrema[1].e - land.extrema[0].e);
        let q = p.with_energy(e).unwrap();
        let (m1, m1p) = turning_points(&q).unwrap();
        let m = m1 + u * (m1p - m1);
        let h = 1e-7;
        let dk = (momentum_k(&q.with_energy(e + h).unwrap(), m).unwrap()
            - momentum_k(&q.with_energy(e - h).unwrap(), m).unwrap())
            / (2.0 * h);
        let nu = velocity_nu(&q, m).unwrap();
        prop_assert!((nu * dk + 1.0).abs() < 1e-4);
    }
}
