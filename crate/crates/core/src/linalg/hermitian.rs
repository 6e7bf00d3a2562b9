use super::{c, schur, ComplexMatrix, LinalgError};

/// Real eigenvalues (ascending) and orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Eigen-decomposition of the Hermitian part `(M + M†)/2`.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    let n = m.dim();
    let h = (m + &m.adjoint()).scale(c(0.5, 0.0));
    let s = schur(&h)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.t[(a, a)].re.total_cmp(&s.t[(b, b)].re));
    let values = order.iter().map(|&k| s.t[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| s.q[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Principal square root of a Hermitian positive-definite matrix.
pub fn hpd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let he = hermitian_eig(m)?;
    let n = m.dim();
    if let Some(k) = he.values.iter().position(|&v| v <= 0.0) {
        return Err(LinalgError::Singular { col: k });
    }
    let roots: Vec<f64> = he.values.iter().map(|v| v.sqrt()).collect();
    let q = &he.vectors;
    Ok(ComplexMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| q[(i, k)] * roots[k] * q[(j, k)].conj()).sum()
    }))
}

/// Singular values in descending order, from the Hermitian embedding
/// `[[0, A], [A†, 0]]` whose eigenvalues are `±σ`.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    let n = a.dim();
    let emb = ComplexMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
        (true, false) => a[(i, j - n)],
        (false, true) => a[(j, i - n)].conj(),
        _ => c(0.0, 0.0),
    });
    let he = hermitian_eig(&emb)?;
    let mut s: Vec<f64> = he.values[n..].iter().map(|v| v.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let m = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0), c(0.0, -0.5)], vec![c(0.0, 0.5), c(1.0, 0.0)]]).unwrap();
        let s = hpd_sqrt(&m).unwrap();
        assert!((&(&s * &s) - &m).max_abs() < 1e-14);
        assert!(s.is_hermitian(1e-14));
    }

    #[test]
    fn singular_values_of_jordan_block() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        let s = singular_values(&j).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
        assert!(s[2] < 1e-14);
    }
}
