use proptest::prelude::*;
use qmctunnel::spectrum::{
    gap_dense, gap_double_well, gap_sparse, gap_symmetric_sector, log_splitting, symmetric_eigen, GridSpec,
};
use qmctunnel::wkb::splitting_closed_form;
use qmctunnel::{DoubleWell, SpinModel};

/// Splitting of `p² + λx⁴ - x²` from a truncated harmonic-oscillator basis,
/// an independent discretization of the same Hamiltonian.
fn oscillator_basis_gap(lambda: f64, omega: f64, n: usize) -> f64 {
    let big = n + 6;
    let mut x = vec![0.0; big * big];
    for i in 0..big - 1 {
        let v = ((i + 1) as f64 / omega).sqrt();
        x[i * big + i + 1] = v;
        x[(i + 1) * big + i] = v;
    }
    let mul = |a: &[f64], b: &[f64]| {
        let mut c = vec![0.0; big * big];
        for i in 0..big {
            for k in 0..big {
                let aik = a[i * big + k];
                if aik != 0.0 {
                    for j in 0..big {
                        c[i * big + j] += aik * b[k * big + j];
                    }
                }
            }
        }
        c
    };
    let x2 = mul(&x, &x);
    let x4 = mul(&x2, &x2);
    // with mass 1/2: p² = H_osc - ω² x² / 4
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut v = (-(omega * omega) / 4.0 - 1.0) * x2[i * big + j] + lambda * x4[i * big + j];
            if i == j {
                v += omega * (i as f64 + 0.5);
            }
            h[i * n + j] = v;
        }
    }
    let e = symmetric_eigen(&h, n, false).unwrap();
    e.values[1] - e.values[0]
}

/// Reference splitting at λ = 0.2, mass 1/2, from the oscillator basis
/// (ω = 2.5, 300 states) and confirmed by the grid solver.
const DELTA_LAMBDA_0_2: f64 = 0.593_779_862_009;

#[test]
fn double_well_reference_value() {
    let oracle = oscillator_basis_gap(0.2, 2.5, 240);
    assert!((oracle - DELTA_LAMBDA_0_2).abs() < 1e-9);
    let grid = gap_double_well(&DoubleWell::new(0.2).unwrap(), &GridSpec::default()).unwrap();
    assert!((grid.delta - DELTA_LAMBDA_0_2).abs() / DELTA_LAMBDA_0_2 < 1e-8);
    assert!(grid.accuracy.unwrap() < 1e-6);
}

#[test]
fn double_well_three_grid_convergence() {
    // second-order scheme: successive Richardson-free differences shrink 4x
    let dw = DoubleWell::new(0.2).unwrap();
    let gaps: Vec<f64> = [512usize, 1025, 2051]
        .iter()
        .map(|&n| {
            let grid = GridSpec {
                points: n,
                tolerance: 1.0,
                ..GridSpec::default()
            };
            gap_double_well(&dw, &grid).unwrap().delta
        })
        .collect();
    let r1 = (gaps[0] - DELTA_LAMBDA_0_2).abs();
    let r2 = (gaps[2] - DELTA_LAMBDA_0_2).abs();
    assert!(r2 < r1);
    assert!(r2 < 1e-7);
}

#[test]
fn double_well_window_matches_oscillator_basis() {
    for lambda in [0.1, 0.125, 0.15, 5.0] {
        let oracle = oscillator_basis_gap(lambda, 2.5, 240);
        let grid = gap_double_well(&DoubleWell::new(lambda).unwrap(), &GridSpec::default()).unwrap();
        assert!((grid.delta - oracle).abs() / oracle < 1e-7, "λ={lambda}");
    }
}

#[test]
fn fully_connected_solvers_agree() {
    for l in [3usize, 6, 9] {
        for gamma in [0.3f64, 0.8, 1.4] {
            let model = SpinModel::fully_connected(l, gamma).unwrap();
            let d = gap_dense(&model).unwrap();
            let s = gap_sparse(&model, 2).unwrap();
            let y = gap_symmetric_sector(&model).unwrap();
            assert!((d.delta - s.delta).abs() < 1e-9, "L={l} Γ={gamma}");
            assert!((d.delta - y.delta).abs() < 1e-9, "L={l} Γ={gamma}");
            assert!((d.eigenvalues[0] - y.eigenvalues[0]).abs() < 1e-9);
        }
    }
}

#[test]
fn sector_log_splitting_tracks_closed_form() {
    // |ln Δ|/L over the closed form approaches one as 1/L²
    for gamma in [0.3f64, 0.4, 0.5, 0.6] {
        let dev = |l: usize| {
            let exact = log_splitting(&SpinModel::fully_connected(l, gamma).unwrap()).unwrap();
            let cf = splitting_closed_form(gamma, l).unwrap();
            (exact / (cf.b.ln() - l as f64 * cf.c) - 1.0).abs()
        };
        let (d100, d400) = (dev(100), dev(400));
        assert!(d400 < 1e-4, "Γ={gamma}");
        let ratio = d100 / d400;
        assert!(ratio > 12.0 && ratio < 20.0, "Γ={gamma}: {ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chain_dense_and_sparse_agree(l in 2usize..9, gamma in 0.05f64..1.5, periodic in any::<bool>()) {
        let model = if periodic { SpinModel::chain(l, gamma) } else { SpinModel::open_chain(l, gamma) }.unwrap();
        let d = gap_dense(&model).unwrap();
        let s = gap_sparse(&model, 2).unwrap();
        prop_assert!((d.eigenvalues[0] - s.eigenvalues[0]).abs() < 1e-9);
        prop_assert!((d.delta - s.delta).abs() < 1e-9);
        prop_assert!(d.delta >= 0.0);
    }

    #[test]
    fn sector_ground_state_is_positive(l in 2usize..60, gamma in 0.05f64..2.0) {
        let model = SpinModel::fully_connected(l, gamma).unwrap();
        let h = qmctunnel::spectrum::SymmetricSectorHamiltonian::ground_sector(&model).unwrap();
        let (_, v) = h.ground_state().unwrap();
        prop_assert!(v.iter().all(|&x| x > 0.0));
    }
}
