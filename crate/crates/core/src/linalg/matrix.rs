use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use super::{c, LinalgError};

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn scalar(dim: usize, value: Complex64) -> Self {
        Self::identity(dim).scale(value)
    }

    pub fn from_diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows, validating shape and finiteness.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(LinalgError::NotSquare {
                    row: i,
                    len: row.len(),
                    dim,
                });
            }
            data.extend_from_slice(row);
        }
        let m = Self { dim, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Real-valued convenience constructor, mostly for tests and fixed model matrices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| {
            assert_eq!(rows[i].len(), dim, "row {i} has wrong length");
            c(rows[i][j], 0.0)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[Complex64]) {
        for (i, v) in values.iter().enumerate() {
            self[(i, j)] = *v;
        }
    }

    pub fn check_finite(&self) -> Result<(), LinalgError> {
        match self.data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            Some(k) => Err(LinalgError::NonFinite {
                row: k / self.dim,
                col: k % self.dim,
            }),
            None => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.check_finite().is_ok()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self - &self.adjoint()).max_abs() <= tol * self.max_abs().max(1.0)
    }

    pub fn is_complex_symmetric(&self, tol: f64) -> bool {
        (self - &self.transpose()).max_abs() <= tol * self.max_abs().max(1.0)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Row vector times matrix.
    pub fn vecmat(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut out = vec![c(0.0, 0.0); self.dim];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// `u vᵀ` for a column `u` and row `v`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j])
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>12.5e}{:+.5e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
