//! Matrix exponential by scaling and squaring with a degree-13 Padé core.

use super::{c, ComplexMatrix, LinalgError, Lu};

const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA_13: f64 = 5.371920351148152;

pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    a.check_finite()?;
    let n = a.dim();
    let norm = a.norm_one();
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(c(0.5f64.powi(s), 0.0));
    let id = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let r = |x: f64| c(x, 0.0);

    let inner_u = &(&a6.scale(r(B[13])) + &a4.scale(r(B[11]))) + &a2.scale(r(B[9]));
    let u_poly = &(&(&a6 * &inner_u) + &a6.scale(r(B[7])))
        + &(&(&a4.scale(r(B[5])) + &a2.scale(r(B[3]))) + &id.scale(r(B[1])));
    let u = &a * &u_poly;
    let inner_v = &(&a6.scale(r(B[12])) + &a4.scale(r(B[10]))) + &a2.scale(r(B[8]));
    let v = &(&(&a6 * &inner_v) + &a6.scale(r(B[6])))
        + &(&(&a4.scale(r(B[4])) + &a2.scale(r(B[2]))) + &id.scale(r(B[0])));

    let p = &v + &u;
    let q = &v - &u;
    let lu = Lu::factor(&q)?;
    let mut x = ComplexMatrix::zeros(n);
    for j in 0..n {
        x.set_column(j, &lu.solve(&p.column(j)));
    }
    for _ in 0..s {
        x = &x * &x;
    }
    Ok(x)
}
