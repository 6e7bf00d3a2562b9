//! Dense complex linear algebra for small non-Hermitian problems.
//!
//! Everything here is hand-written on top of `num_complex`: a Schur-based
//! eigen-solver with paired left/right eigenvectors, LU solves, Hermitian
//! helpers, a Padé matrix exponential and spectral projectors.

mod eigen;
mod expm;
mod hermitian;
mod jordan;
mod lu;
mod matrix;
mod schur;

pub use eigen::{
    biorthogonalize, char_discriminant, char_discriminant_of, closest_pair, discriminant, eig, eigenvalues, log_discriminant,
    sort_eigenvalues, EigenSystem, LogDiscriminant, DEFAULT_CLUSTER_TOL,
};
pub use expm::expm;
pub use hermitian::{hermitian_eig, hpd_sqrt, singular_values, HermitianEigen};
pub use jordan::{cluster_around, jordan_cluster, nilpotent_part, spectral_projector, JordanCluster};
pub use lu::Lu;
pub use matrix::ComplexMatrix;
pub use schur::{schur, Schur};

use num_complex::Complex64;
use thiserror::Error;

/// Shorthand constructor for a complex scalar.
#[inline]
pub const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Bilinear product `Σ aᵢbᵢ` with no conjugation.
pub fn bilinear(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian product `Σ conj(aᵢ)bᵢ`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix has no rows")]
    Empty,
    #[error("row {row} has length {len}, expected {dim}")]
    NotSquare { row: usize, len: usize, dim: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigen-solver did not converge after {iterations} QR iterations")]
    NoConvergence { iterations: usize },
    #[error("eigenpair {index} is nearly self-orthogonal (|s| = {overlap:.3e})")]
    NearDefective { index: usize, overlap: f64 },
    #[error("no coalescing cluster at the requested energy")]
    NotDefective { ratio: f64 },
    #[error("matrix is singular at pivot column {col}")]
    Singular { col: usize },
}
