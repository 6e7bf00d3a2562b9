#![allow(dead_code)]

use epcore::linalg::{c, ComplexMatrix};
use num_complex::Complex64;
use proptest::prelude::*;

pub fn cx() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b))
}

pub fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec(cx(), n * n)
        .prop_map(move |v| ComplexMatrix::from_fn(n, |i, j| v[i * n + j]))
}

/// `(tr ± √(tr² − 4 det))/2` for a 2x2 matrix.
pub fn eig2(m: &ComplexMatrix) -> [Complex64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let r = (tr * tr - 4.0 * det).sqrt();
    [(tr + r) / 2.0, (tr - r) / 2.0]
}

pub fn same_pair(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
    let direct = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let crossed = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    direct.min(crossed)
}
