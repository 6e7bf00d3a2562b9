mod common;

use common::cx;
use epcore::finder::{census, classify, refine_ep, MatrixFamily, SearchRegion};
use epcore::linalg::{c, ComplexMatrix};
use epcore::twolevel::{ep_locations, TwoLevelParams};
use num_complex::Complex64;
use proptest::prelude::*;

/// Zeros of `tr² − 4 det` inside the circle `|λ − z0| = r`, by winding number.
fn winding_count(p: &TwoLevelParams, z0: Complex64, r: f64) -> i64 {
    let disc = |l: Complex64| {
        let h = p.at(l);
        let tr = h[(0, 0)] + h[(1, 1)];
        tr * tr - 4.0 * (h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)])
    };
    let steps = 4096;
    let mut total = 0.0;
    let mut prev = disc(z0 + r);
    for k in 1..=steps {
        let next = disc(z0 + Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / steps as f64));
        total += (next / prev).arg();
        prev = next;
    }
    (total / std::f64::consts::TAU).round() as i64
}

fn params() -> impl Strategy<Value = TwoLevelParams> {
    ([cx(), cx()], [cx(), cx()], [cx(), cx()])
        .prop_map(|(o, e, d)| TwoLevelParams::new(o, e, d))
        .prop_filter("nondegenerate", |p| {
            (p.delta[0] * p.delta[1]).norm() > 0.1 && (p.omega[0] - p.omega[1]).norm() > 0.1
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn census_count_matches_winding_number(p in params()) {
        let ep = ep_locations(&p).unwrap();
        let radius = 1.5;
        // Skip draws with a zero near the contour or the region edge.
        prop_assume!(ep.lambda.iter().all(|l| (l.norm() - radius).abs() > 0.05));
        prop_assume!((ep.lambda[0] - ep.lambda[1]).norm() > 0.05);
        let found = census(&p.family(), &SearchRegion::square(c(0.0, 0.0), 2.0, 0.05)).unwrap();
        let inside = found.iter().filter(|e| e.lambda().norm() < radius).count() as i64;
        prop_assert_eq!(inside, winding_count(&p, c(0.0, 0.0), radius));
    }

    #[test]
    fn refinement_lands_on_closed_form(p in params(), k in 0usize..2, kick in cx()) {
        let ep = ep_locations(&p).unwrap();
        prop_assume!(ep.lambda.iter().all(|l| l.norm() < 20.0));
        let spread = (ep.lambda[0] - ep.lambda[1]).norm();
        prop_assume!(spread > 0.05);
        let got = refine_ep(&p.family(), ep.lambda[k] + kick * (0.05 * spread)).unwrap();
        prop_assert!((got.lambda() - ep.lambda[k]).norm() < 1e-8 * ep.lambda[k].norm().max(1.0));
        prop_assert!(got.is_ep2());
    }
}

#[test]
fn census_is_deterministic() {
    let f = TwoLevelParams::new([c(0.3, 0.1), c(-0.7, 0.2)], [c(0.1, 0.0), c(0.0, -0.2)], [c(0.8, 0.1), c(0.5, -0.3)])
        .family();
    let r = SearchRegion::square(c(0.0, 0.0), 3.0, 0.05);
    assert_eq!(census(&f, &r).unwrap(), census(&f, &r).unwrap());
}

#[test]
fn exponents_separate_coalescence_from_crossing() {
    let dimer = TwoLevelParams::canonical_dimer().family();
    let ep = refine_ep(&dimer, c(0.05, 1.1)).unwrap();
    assert!((ep.exponent - 0.5).abs() < 0.05, "{}", ep.exponent);

    let a = ComplexMatrix::from_real_rows(&[&[0.5, 0.8], &[0.8, -0.5]]);
    let crossing = MatrixFamily::single(ComplexMatrix::zeros(2), a).unwrap();
    let cl = classify(&crossing, c(0.0, 0.0), &[0, 1]).unwrap();
    assert!((cl.exponent - 1.0).abs() < 0.05, "{}", cl.exponent);
}

#[test]
fn region_without_eps_is_empty() {
    let f = TwoLevelParams::canonical_dimer().family();
    let r = SearchRegion::new(c(0.5, -0.5), c(1.5, 0.5), 0.05);
    assert!(census(&f, &r).unwrap().is_empty());
}
