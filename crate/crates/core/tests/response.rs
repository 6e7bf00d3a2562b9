mod common;

use common::{cx, matrix};
use epcore::finder::refine_ep;
use epcore::linalg::{c, norm2, ComplexMatrix};
use epcore::response::{cross_section, lorentz_fit, open_dimer, pole_decomposition, propagate};
use epcore::twolevel::TwoLevelParams;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagation_composes(h in matrix(3), a in cx(), b in cx(), c0 in cx(), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let psi = vec![a, b, c0];
        prop_assume!(norm2(&psi) > 0.1);
        let stepped = propagate(&h, &propagate(&h, &psi, t1).unwrap(), t2).unwrap();
        let direct = propagate(&h, &psi, t1 + t2).unwrap();
        let d: Vec<_> = stepped.iter().zip(&direct).map(|(x, y)| x - y).collect();
        prop_assert!(norm2(&d) <= 1e-10 * norm2(&direct).max(1.0));
    }

    #[test]
    fn hermitian_evolution_is_unitary(a in matrix(3), x in cx(), y in cx(), t in 0.0f64..10.0) {
        let h = &a + &a.adjoint();
        let psi = vec![x, y, c(1.0, 0.0)];
        let out = propagate(&h, &psi, t).unwrap();
        prop_assert!((norm2(&out) - norm2(&psi)).abs() < 1e-10 * norm2(&psi));
    }
}

#[test]
fn eigenvector_at_ep_decays_exponentially() {
    let od = open_dimer();
    let h = od.params.at(od.lambda_ep);
    for t in [0.5, 2.0, 8.0] {
        let got = propagate(&h, &od.phi, t).unwrap();
        let phase = (c(0.0, -t) * od.energy).exp();
        for k in 0..2 {
            assert!((got[k] - phase * od.phi[k]).norm() < 1e-10);
        }
    }
}

#[test]
fn eigenvector_channel_line_shape_is_lorentzian() {
    let od = open_dimer();
    let grid: Vec<f64> = (0..401).map(|k| -2.0 + 0.01 * k as f64).collect();
    let shape = cross_section(&od.params.family(), od.lambda_ep, &od.phi, &od.phi, &grid).unwrap();
    let fit = lorentz_fit(&shape).unwrap();
    let peak = shape.values.iter().cloned().fold(0.0, f64::max);
    assert!(fit.residual < 1e-8 * peak, "{} vs {peak}", fit.residual);
    assert!((fit.center - od.energy.re).abs() < 1e-6);
}

#[test]
fn pole_terms_have_jordan_structure() {
    let f = TwoLevelParams::canonical_dimer().family();
    let ep = refine_ep(&f, c(0.1, 0.9)).unwrap();
    let d = pole_decomposition(&f, &ep).unwrap();
    let n = &d.second_order;
    let p = &d.first_order;
    // P is a projector, N is nilpotent and lives inside P.
    assert!((&(p * p) - p).norm_fro() < 1e-8 * p.norm_fro());
    assert!((n * n).norm_fro() < 1e-8 * n.norm_fro().powi(2));
    assert!((&(p * n) - n).norm_fro() < 1e-8 * n.norm_fro());
    let h = f.at(ep.lambda());
    let want = &h - &ComplexMatrix::scalar(2, d.e_ep);
    assert!((&(&want * p) - n).norm_fro() < 1e-8 * n.norm_fro());
    assert!(d.reconstruction_error < 1e-9);
}
