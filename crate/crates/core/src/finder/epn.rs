//! Higher-order coalescences in multi-parameter families.
//!
//! An `n`-level coalescence is the common zero of the centered power sums
//! `p_k = Σ (E_i − Ē)^k`, `k = 2..=n`, of the `n` clustered eigenvalues.
//! These are symmetric functions of the cluster and hence analytic in the
//! parameters, unlike the eigenvalues themselves.

use num_complex::Complex64;

use super::{classify_with, refine_ep_with, EpKind, ExceptionalPoint, FinderError, FinderOptions, MatrixFamily};
use crate::linalg::{c, eigenvalues, jordan_cluster, singular_values, ComplexMatrix, Lu};

#[derive(Clone, Debug, PartialEq)]
#[derive(Default)]
pub struct EpnOptions {
    pub finder: FinderOptions,
    /// Direction in parameter space for the exponent check; defaults to the
    /// first parameter axis.
    pub direction: Option<Vec<Complex64>>,
}


pub fn find_epn(f: &MatrixFamily, seed: &[Complex64], n: usize) -> Result<ExceptionalPoint, FinderError> {
    find_epn_with(f, seed, n, &EpnOptions::default())
}

/// Multivariate Newton (minimum-norm steps) for an `n`-fold coalescence,
/// followed by order verification.
pub fn find_epn_with(
    f: &MatrixFamily,
    seed: &[Complex64],
    n: usize,
    opts: &EpnOptions,
) -> Result<ExceptionalPoint, FinderError> {
    if n < 2 || n > f.dim() {
        return Err(FinderError::InvalidCluster(format!("order {n} for dimension {}", f.dim())));
    }
    if seed.len() != f.n_params() {
        return Err(FinderError::ParameterCount {
            expected: f.n_params(),
            got: seed.len(),
        });
    }
    if n == 2 && f.n_params() == 1 {
        let ep = refine_ep_with(f, seed[0], &opts.finder)?;
        if ep.kind != EpKind::Ep2 {
            return Err(FinderError::OrderMismatch {
                expected: 2,
                reason: format!("refined point classified as {}", ep.kind.as_str()),
            });
        }
        return Ok(ep);
    }
    if f.n_params() < n - 1 {
        return Err(FinderError::InsufficientParameters {
            needed: n,
            available: f.n_params(),
        });
    }

    let fo = &opts.finder;
    let mut lam = seed.to_vec();
    let mut converged = false;
    let mut iterations = 0;
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let mut since_best = 0usize;
    for it in 0..fo.max_iter {
        iterations = it + 1;
        let h = f.evaluate(&lam)?;
        let (res, center) = power_sums(&h, n, None)?;
        let rnorm = vec_norm(&res);
        let scale = h.norm_fro().max(1.0);
        match &best {
            Some((b, _)) if rnorm >= *b => since_best += 1,
            _ => {
                best = Some((rnorm, lam.clone()));
                since_best = 0;
            }
        }
        if rnorm == 0.0 {
            converged = true;
            break;
        }
        if since_best >= 8 {
            let (b, bl) = best.clone().expect("set above");
            if b <= fo.accept_residual * scale.powi(n as i32) {
                lam = bl;
                converged = true;
                break;
            }
        }
        let jac = jacobian(f, &lam, n, center, fo)?;
        let step = min_norm_step(&jac, &res)?;
        let snorm = vec_norm(&step);
        let lnorm = vec_norm(&lam);
        let cap = fo.max_step.unwrap_or(0.5 * (1.0 + lnorm));
        let damp = if snorm > cap { cap / snorm } else { 1.0 };
        for (l, s) in lam.iter_mut().zip(&step) {
            *l -= s * damp;
        }
        if lam.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            break;
        }
        if snorm <= fo.step_tol * (1.0 + lnorm) {
            let (r2, _) = power_sums(&f.evaluate(&lam)?, n, None)?;
            if vec_norm(&r2) <= fo.accept_residual * scale.powi(n as i32) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(FinderError::NoConvergence {
            iterations,
            last: lam[0],
        });
    }
    verify(f, &lam, n, opts, iterations)
}

/// Centered power sums `p_2..p_n` of the `n` eigenvalues nearest `near`
/// (or of the tightest `n`-cluster), and their mean.
fn power_sums(
    h: &ComplexMatrix,
    n: usize,
    near: Option<Complex64>,
) -> Result<(Vec<Complex64>, Complex64), FinderError> {
    let eigs = eigenvalues(h)?;
    let chosen = match near {
        Some(z) => nearest(&eigs, z, n),
        None => tightest(&eigs, n),
    };
    let mean = chosen.iter().sum::<Complex64>() / n as f64;
    let sums = (2..=n as i32)
        .map(|k| chosen.iter().map(|e| (e - mean).powi(k)).sum())
        .collect();
    Ok((sums, mean))
}

fn nearest(eigs: &[Complex64], z: Complex64, n: usize) -> Vec<Complex64> {
    let mut v = eigs.to_vec();
    v.sort_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()));
    v.truncate(n);
    v
}

fn tightest(eigs: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for &anchor in eigs {
        let v = nearest(eigs, anchor, n);
        let spread = v.iter().map(|e| (e - anchor).norm()).fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(s, _)| spread < *s) {
            best = Some((spread, v));
        }
    }
    best.map(|b| b.1).unwrap_or_default()
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Central-difference Jacobian, rows = conditions, columns = parameters.
fn jacobian(
    f: &MatrixFamily,
    lam: &[Complex64],
    n: usize,
    center: Complex64,
    fo: &FinderOptions,
) -> Result<Vec<Vec<Complex64>>, FinderError> {
    let m = n - 1;
    let p = lam.len();
    let mut jac = vec![vec![c(0.0, 0.0); p]; m];
    for col in 0..p {
        let h = {
            let d = 1e-6 * (1.0 + lam[col].norm());
            fo.fd_step.map_or(d, |cap| cap.min(d))
        };
        let mut plus = lam.to_vec();
        let mut minus = lam.to_vec();
        plus[col] += h;
        minus[col] -= h;
        let (fp, _) = power_sums(&f.evaluate(&plus)?, n, Some(center))?;
        let (fm, _) = power_sums(&f.evaluate(&minus)?, n, Some(center))?;
        for row in 0..m {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `J⁺r = J†(JJ†)⁻¹r`.
fn min_norm_step(jac: &[Vec<Complex64>], r: &[Complex64]) -> Result<Vec<Complex64>, FinderError> {
    let m = jac.len();
    let p = jac[0].len();
    let jjt = ComplexMatrix::from_fn(m, |a, b| (0..p).map(|k| jac[a][k] * jac[b][k].conj()).sum());
    let y = Lu::factor(&jjt)?.solve(r);
    Ok((0..p).map(|k| (0..m).map(|a| jac[a][k].conj() * y[a]).sum()).collect())
}

fn verify(
    f: &MatrixFamily,
    lam: &[Complex64],
    n: usize,
    opts: &EpnOptions,
    iterations: usize,
) -> Result<ExceptionalPoint, FinderError> {
    let mismatch = |reason: String| FinderError::OrderMismatch { expected: n, reason };
    let h = f.evaluate(lam)?;
    let (res, center) = power_sums(&h, n, None)?;
    let cl = jordan_cluster(&h, center)?;
    if cl.size() != n {
        return Err(mismatch(format!("cluster at the point has {} levels", cl.size())));
    }
    let scale = h.norm_fro().max(1.0);
    let shifted = &h - &ComplexMatrix::scalar(h.dim(), cl.energy);
    let sv = singular_values(&shifted)?;
    let nullity = sv.iter().filter(|&&s| s <= 1e-7 * scale).count();
    if nullity != 1 {
        return Err(mismatch(format!("H − E*I has nullity {nullity}")));
    }
    let nnorm = cl.nilpotent.norm_fro();
    let chain = (1..=n + 1)
        .find(|&k| cl.nilpotent.pow(k as u32).norm_fro() <= 1e-8 * nnorm.max(f64::MIN_POSITIVE).powi(k as i32))
        .unwrap_or(n + 2);
    if chain != n {
        return Err(mismatch(format!("Jordan chain length {chain}")));
    }
    let direction = opts.direction.clone().unwrap_or_else(|| {
        let mut d = vec![c(0.0, 0.0); f.n_params()];
        d[0] = c(1.0, 0.0);
        d
    });
    let line = f.slice(lam, &direction)?;
    let cls = classify_with(&line, c(0.0, 0.0), &cl.members, &opts.finder)?;
    let target = 1.0 / n as f64;
    if !((cls.exponent - target).abs() <= 0.1 * target) {
        return Err(mismatch(format!("splitting exponent {:.4}", cls.exponent)));
    }
    Ok(ExceptionalPoint {
        location: lam.to_vec(),
        energy: cl.energy,
        order: n,
        kind: if n == 2 { EpKind::Ep2 } else { EpKind::EpN },
        level_indices: cl.members,
        defect_overlap: cls.defect_overlap,
        exponent: cls.exponent,
        residual: vec_norm(&res),
        iterations,
    })
}
