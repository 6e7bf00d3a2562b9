use num_complex::Complex64;

use super::{c, ComplexMatrix, LinalgError};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    /// Fails with `Singular` when a pivot falls below `eps·‖A‖₁`.
    pub fn factor(a: &ComplexMatrix) -> Result<Self, LinalgError> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let tiny = f64::EPSILON * a.norm_one().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
                .unwrap_or(k);
            if lu[(p, k)].norm() <= tiny {
                return Err(LinalgError::Singular { col: k });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.dim();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.lu.dim();
        let mut inv = ComplexMatrix::zeros(n);
        let mut e = vec![c(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = c(0.0, 0.0));
            e[j] = c(1.0, 0.0);
            inv.set_column(j, &self.solve(&e));
        }
        inv
    }

    pub fn det(&self) -> Complex64 {
        (0..self.lu.dim()).map(|i| self.lu[(i, i)]).product::<Complex64>() * self.sign
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = ComplexMatrix::from_fn(4, |i, j| c((i + 2 * j) as f64 % 3.0 + if i == j { 3.0 } else { 0.0 }, (i as f64) - (j as f64) * 0.5));
        let lu = Lu::factor(&a).unwrap();
        let prod = &a * &lu.inverse();
        assert!((&prod - &ComplexMatrix::identity(4)).max_abs() < 1e-13);
    }

    #[test]
    fn singular_is_reported() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(Lu::factor(&a), Err(LinalgError::Singular { col: 1 })));
    }

    #[test]
    fn determinant_of_swap() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(Lu::factor(&a).unwrap().det(), c(-1.0, 0.0));
    }
}
