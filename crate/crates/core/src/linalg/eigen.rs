use std::cmp::Ordering;

use num_complex::Complex64;

use super::{bilinear, c, norm2, schur, ComplexMatrix, LinalgError, Lu};
use crate::finder::MatrixFamily;

/// Relative separation below which two eigenvalues count as coincident.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Eigenvalues with paired right (column) and left (row) eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub dim: usize,
    pub eigenvalues: Vec<Complex64>,
    pub right_vectors: Vec<Vec<Complex64>>,
    pub left_vectors: Vec<Vec<Complex64>>,
    /// Raw `ψ̃_k ψ_k` for the vectors as stored.
    pub overlaps: Vec<Complex64>,
    pub normalized: bool,
    /// Frobenius norm of the decomposed matrix.
    pub matrix_norm: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max_k ‖Mψ_k − E_kψ_k‖`.
    pub fn right_residual(&self, m: &ComplexMatrix) -> f64 {
        (0..self.len())
            .map(|k| {
                let mv = m.matvec(&self.right_vectors[k]);
                let r: Vec<Complex64> = mv
                    .iter()
                    .zip(&self.right_vectors[k])
                    .map(|(a, b)| a - self.eigenvalues[k] * b)
                    .collect();
                norm2(&r) / norm2(&self.right_vectors[k]).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// `max_k ‖ψ̃_k M − E_kψ̃_k‖`.
    pub fn left_residual(&self, m: &ComplexMatrix) -> f64 {
        (0..self.len())
            .map(|k| {
                let vm = m.vecmat(&self.left_vectors[k]);
                let r: Vec<Complex64> = vm
                    .iter()
                    .zip(&self.left_vectors[k])
                    .map(|(a, b)| a - self.eigenvalues[k] * b)
                    .collect();
                norm2(&r) / norm2(&self.left_vectors[k]).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// `max_{k,j} |ψ̃_k ψ_j − δ_kj|`.
    pub fn biorthogonality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.len() {
            for j in 0..self.len() {
                let target = if k == j { 1.0 } else { 0.0 };
                let o = bilinear(&self.left_vectors[k], &self.right_vectors[j]);
                worst = worst.max((o - target).norm());
            }
        }
        worst
    }

    pub fn min_abs_overlap(&self) -> f64 {
        self.overlaps.iter().map(|s| s.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Lexicographic (Re, Im) order used for every eigenvalue list.
pub fn sort_eigenvalues(values: &mut [Complex64]) {
    values.sort_by(cmp_re_im);
}

fn cmp_re_im(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Sorted eigenvalues only; cheaper than [`eig`].
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let s = schur(m)?;
    let mut vals: Vec<Complex64> = (0..m.dim()).map(|i| s.t[(i, i)]).collect();
    sort_eigenvalues(&mut vals);
    Ok(vals)
}

/// Full eigen-decomposition with unit-norm left and right vectors.
///
/// Each vector is phased so that its largest component is real positive.
pub fn eig(m: &ComplexMatrix) -> Result<EigenSystem, LinalgError> {
    let n = m.dim();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    let s = schur(m)?;
    let t = &s.t;
    let tnorm = t.norm_fro();
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE * 1e10);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_re_im(&t[(a, a)], &t[(b, b)]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut right_vectors = Vec::with_capacity(n);
    let mut left_vectors = Vec::with_capacity(n);
    let mut overlaps = Vec::with_capacity(n);
    for &k in &order {
        let lam = t[(k, k)];
        let v = triangular_right(t, k, smin);
        let w = triangular_left(t, k, smin);
        let right = normalize_phase(s.q.matvec(&v));
        // Row vector w Q*.
        let left: Vec<Complex64> = (0..n)
            .map(|j| (k..n).map(|i| w[i] * s.q[(j, i)].conj()).sum())
            .collect();
        let left = normalize_phase(left);
        overlaps.push(bilinear(&left, &right));
        eigenvalues.push(lam);
        right_vectors.push(right);
        left_vectors.push(left);
    }
    Ok(EigenSystem {
        dim: n,
        eigenvalues,
        right_vectors,
        left_vectors,
        overlaps,
        normalized: false,
        matrix_norm: m.norm_fro(),
    })
}

const RESCALE_AT: f64 = 1e150;

fn guarded(d: Complex64, smin: f64) -> Complex64 {
    if d.norm() < smin {
        c(smin, 0.0)
    } else {
        d
    }
}

/// Solves `(T − T_kk) v = 0` with `v_k = 1` by back-substitution.
fn triangular_right(t: &ComplexMatrix, k: usize, smin: f64) -> Vec<Complex64> {
    let n = t.dim();
    let lam = t[(k, k)];
    let mut v = vec![c(0.0, 0.0); n];
    v[k] = c(1.0, 0.0);
    for i in (0..k).rev() {
        let mut acc = c(0.0, 0.0);
        for j in i + 1..=k {
            acc += t[(i, j)] * v[j];
        }
        v[i] = acc / guarded(lam - t[(i, i)], smin);
        if v[i].norm() > RESCALE_AT {
            let s = 1.0 / v[i].norm();
            for z in v.iter_mut() {
                *z *= s;
            }
        }
    }
    v
}

/// Solves `w (T − T_kk) = 0` with `w_k = 1` by forward recurrence.
fn triangular_left(t: &ComplexMatrix, k: usize, smin: f64) -> Vec<Complex64> {
    let n = t.dim();
    let lam = t[(k, k)];
    let mut w = vec![c(0.0, 0.0); n];
    w[k] = c(1.0, 0.0);
    for j in k + 1..n {
        let mut acc = c(0.0, 0.0);
        for i in k..j {
            acc += w[i] * t[(i, j)];
        }
        w[j] = acc / guarded(lam - t[(j, j)], smin);
        if w[j].norm() > RESCALE_AT {
            let s = 1.0 / w[j].norm();
            for z in w.iter_mut() {
                *z *= s;
            }
        }
    }
    w
}

fn normalize_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = norm2(&v);
    if norm == 0.0 {
        return v;
    }
    let big = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(c(1.0, 0.0));
    let phase = big.conj() / big.norm();
    for z in v.iter_mut() {
        *z *= phase / norm;
    }
    v
}

/// Rescales the pairs so that `ψ̃_k ψ_j = δ_kj`, splitting `1/√s_k` evenly
/// between the left and right vectors.
///
/// Eigenvalues closer than `DEFAULT_CLUSTER_TOL·max(1, ‖M‖)` are treated as
/// a semisimple block and biorthogonalized jointly.
pub fn biorthogonalize(sys: &EigenSystem, tol_overlap: f64) -> Result<EigenSystem, LinalgError> {
    let n = sys.len();
    let cluster_tol = DEFAULT_CLUSTER_TOL * sys.matrix_norm.max(1.0);
    let mut out = sys.clone();
    let mut done = vec![false; n];
    for k in 0..n {
        if done[k] {
            continue;
        }
        let members: Vec<usize> = (k..n)
            .filter(|&j| !done[j] && (sys.eigenvalues[j] - sys.eigenvalues[k]).norm() <= cluster_tol)
            .collect();
        for &j in &members {
            done[j] = true;
        }
        if members.len() == 1 {
            let s = bilinear(&sys.left_vectors[k], &sys.right_vectors[k]);
            if s.norm() < tol_overlap {
                return Err(LinalgError::NearDefective {
                    index: k,
                    overlap: s.norm(),
                });
            }
            let f = c(1.0, 0.0) / s.sqrt();
            out.right_vectors[k] = sys.right_vectors[k].iter().map(|z| z * f).collect();
            out.left_vectors[k] = sys.left_vectors[k].iter().map(|z| z * f).collect();
        } else {
            biorthogonalize_block(sys, &mut out, &members, tol_overlap)?;
        }
    }
    for k in 0..n {
        out.overlaps[k] = bilinear(&out.left_vectors[k], &out.right_vectors[k]);
    }
    out.normalized = true;
    Ok(out)
}

fn biorthogonalize_block(
    sys: &EigenSystem,
    out: &mut EigenSystem,
    members: &[usize],
    tol_overlap: f64,
) -> Result<(), LinalgError> {
    let m = members.len();
    // Orthonormalize the right vectors within the cluster, then take left
    // vectors as the dual basis of the span of the cluster's left vectors.
    let mut rights: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for &j in members {
        let mut v = sys.right_vectors[j].clone();
        for u in &rights {
            let p = super::inner(u, &v);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= p * ui;
            }
        }
        let nv = norm2(&v);
        if nv < tol_overlap {
            return Err(LinalgError::NearDefective {
                index: j,
                overlap: nv,
            });
        }
        rights.push(v.iter().map(|z| z / nv).collect());
    }
    let gram = ComplexMatrix::from_fn(m, |a, b| bilinear(&sys.left_vectors[members[a]], &rights[b]));
    let lu = Lu::factor(&gram).map_err(|_| LinalgError::NearDefective {
        index: members[0],
        overlap: 0.0,
    })?;
    let ginv = lu.inverse();
    // New left rows: G⁻¹ L so that (G⁻¹ L) R = I.
    for a in 0..m {
        let mut row = vec![c(0.0, 0.0); sys.dim];
        for b in 0..m {
            for (r, l) in row.iter_mut().zip(&sys.left_vectors[members[b]]) {
                *r += ginv[(a, b)] * l;
            }
        }
        out.left_vectors[members[a]] = row;
        out.right_vectors[members[a]] = rights[a].clone();
    }
    Ok(())
}

/// `∏_{i<j}(E_i − E_j)²`.
pub fn discriminant(eigs: &[Complex64]) -> Complex64 {
    let mut d = c(1.0, 0.0);
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            let g = eigs[i] - eigs[j];
            d *= g * g;
        }
    }
    d
}

/// Discriminant in log-polar form, safe from overflow for larger dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDiscriminant {
    /// `ln|disc|`, `-inf` at an exact coincidence.
    pub ln_abs: f64,
    /// `arg(disc)` reduced to `(−π, π]`.
    pub arg: f64,
}

pub fn log_discriminant(eigs: &[Complex64]) -> LogDiscriminant {
    let mut ln_abs = 0.0;
    let mut arg = 0.0;
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            let g = eigs[i] - eigs[j];
            let g2 = g * g;
            ln_abs += g2.norm().ln();
            arg += g2.arg();
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = arg.rem_euclid(two_pi);
    if a > std::f64::consts::PI {
        a -= two_pi;
    }
    LogDiscriminant { ln_abs, arg: a }
}

/// Discriminant of the spectrum of `m`.
pub fn char_discriminant_of(m: &ComplexMatrix) -> Result<Complex64, LinalgError> {
    Ok(discriminant(&eigenvalues(m)?))
}

/// `∏_{i<j}(E_i(λ) − E_j(λ))²` along the slice `H₀ + λV₀` of a family.
pub fn char_discriminant(f: &MatrixFamily, lambda: Complex64) -> Result<Complex64, LinalgError> {
    char_discriminant_of(&f.at(lambda))
}

/// Indices `(a, b)` with `a < b` of the closest pair and their distance.
pub fn closest_pair(eigs: &[Complex64]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            let d = (eigs[i] - eigs[j]).norm();
            if best.is_none_or(|(_, _, b)| d < b) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_gives_standard_basis() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let sys = eig(&m).unwrap();
        assert_eq!(sys.eigenvalues, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(sys.right_vectors[0], vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(sys.right_vectors[1], vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(!sys.normalized);
    }

    #[test]
    fn dimer_at_ep_has_double_eigenvalue() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, -0.5)], vec![c(0.0, -0.5), c(0.0, 0.0)]])
            .unwrap();
        let sys = eig(&m).unwrap();
        for e in &sys.eigenvalues {
            assert!((e - c(0.5, 0.0)).norm() < 1e-7);
        }
        assert!(sys.min_abs_overlap() < 1e-6);
    }

    #[test]
    fn log_discriminant_matches_product() {
        let e = [c(1.0, 0.2), c(-0.3, 0.5), c(0.0, -1.0)];
        let d = discriminant(&e);
        let l = log_discriminant(&e);
        assert!((d.norm().ln() - l.ln_abs).abs() < 1e-13);
        assert!((d.arg() - l.arg).abs() < 1e-13);
    }

    #[test]
    fn semisimple_cluster_is_biorthogonalized() {
        let m = ComplexMatrix::from_real_rows(&[&[2.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]);
        let sys = biorthogonalize(&eig(&m).unwrap(), 1e-10).unwrap();
        assert!(sys.biorthogonality_error() < 1e-14);
    }
}
