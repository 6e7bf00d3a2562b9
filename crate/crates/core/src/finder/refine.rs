use num_complex::Complex64;

use super::{classify_with, ExceptionalPoint, FinderError, FinderOptions, MatrixFamily};
use crate::linalg::{cluster_around, closest_pair, eigenvalues};

/// A converged Newton zero before classification.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedZero {
    pub lambda: Complex64,
    /// `|g(λ*)|`.
    pub residual: f64,
    pub iterations: usize,
    /// Midpoint of the coalescing pair.
    pub energy: Complex64,
}

/// Squared gap `(E_a − E_b)²` of a pair of levels of `H(λ)`.
///
/// With `near = None` the closest pair is used; otherwise the two
/// eigenvalues nearest `near`, which keeps the same pair across nearby λ.
/// Returns the value and the pair midpoint.
pub fn pair_discriminant(
    f: &MatrixFamily,
    lambda: Complex64,
    near: Option<Complex64>,
) -> Result<(Complex64, Complex64), FinderError> {
    let eigs = eigenvalues(&f.at(lambda))?;
    if eigs.len() < 2 {
        return Err(FinderError::InvalidCluster("family has a single level".into()));
    }
    let (a, b) = match near {
        None => {
            let (a, b, _) = closest_pair(&eigs).expect("at least two levels");
            (eigs[a], eigs[b])
        }
        Some(z) => {
            let mut idx: Vec<usize> = (0..eigs.len()).collect();
            idx.sort_by(|&i, &j| (eigs[i] - z).norm().total_cmp(&(eigs[j] - z).norm()).then(i.cmp(&j)));
            (eigs[idx[0]], eigs[idx[1]])
        }
    };
    let g = a - b;
    Ok((g * g, 0.5 * (a + b)))
}

fn fd_step(opts: &FinderOptions, lambda: Complex64) -> f64 {
    let default = 1e-6 * (1.0 + lambda.norm());
    match opts.fd_step {
        Some(h) => h.min(default),
        None => default,
    }
}

/// Damped complex Newton on the pair discriminant, without classification.
///
/// Stops when the step falls below `step_tol·(1+|λ|)` with a small residual,
/// or when the residual has stagnated at the floor set by rounding.
pub fn refine_location(
    f: &MatrixFamily,
    seed: Complex64,
    opts: &FinderOptions,
) -> Result<RefinedZero, FinderError> {
    if f.n_params() != 1 {
        return Err(FinderError::NotSingleParameter);
    }
    let mut lam = seed;
    let mut best: Option<(f64, Complex64, Complex64)> = None;
    let mut since_best = 0usize;
    for it in 0..opts.max_iter {
        let (g, mid) = pair_discriminant(f, lam, None)?;
        let scale = f.scale_at(lam);
        let accept = opts.accept_residual * scale * scale;
        match best {
            Some((b, _, _)) if g.norm() >= b => since_best += 1,
            _ => {
                best = Some((g.norm(), lam, mid));
                since_best = 0;
            }
        }
        if g.norm() == 0.0 {
            return Ok(RefinedZero {
                lambda: lam,
                residual: 0.0,
                iterations: it,
                energy: mid,
            });
        }
        if since_best >= 8 {
            let (b, bl, bm) = best.expect("set above");
            if b <= accept {
                return Ok(RefinedZero {
                    lambda: bl,
                    residual: b,
                    iterations: it,
                    energy: bm,
                });
            }
        }
        let h = fd_step(opts, lam);
        let (gp, _) = pair_discriminant(f, lam + h, Some(mid))?;
        let (gm, _) = pair_discriminant(f, lam - h, Some(mid))?;
        let d = (gp - gm) / (2.0 * h);
        if !(d.norm() > 0.0) || !d.re.is_finite() || !d.im.is_finite() {
            break;
        }
        let mut step = -g / d;
        let cap = opts.max_step.unwrap_or(0.5 * (1.0 + lam.norm()));
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        lam += step;
        if !lam.re.is_finite() || !lam.im.is_finite() || lam.norm() > 1e8 {
            break;
        }
        if step.norm() <= opts.step_tol * (1.0 + lam.norm()) {
            let (g_new, mid_new) = pair_discriminant(f, lam, None)?;
            if g_new.norm() <= accept {
                return Ok(RefinedZero {
                    lambda: lam,
                    residual: g_new.norm(),
                    iterations: it + 1,
                    energy: mid_new,
                });
            }
        }
    }
    Err(FinderError::NoConvergence {
        iterations: opts.max_iter,
        last: lam,
    })
}

/// Refines a seed to a discriminant zero and classifies the coalescence.
pub fn refine_ep(f: &MatrixFamily, seed: Complex64) -> Result<ExceptionalPoint, FinderError> {
    refine_ep_with(f, seed, &FinderOptions::default())
}

pub fn refine_ep_with(
    f: &MatrixFamily,
    seed: Complex64,
    opts: &FinderOptions,
) -> Result<ExceptionalPoint, FinderError> {
    let z = refine_location(f, seed, opts)?;
    let h = f.at(z.lambda);
    let eigs = eigenvalues(&h)?;
    let floor = opts.cluster_floor * h.norm_fro().max(1.0);
    let cluster = cluster_around(&eigs, z.energy, floor);
    let cl = classify_with(f, z.lambda, &cluster, opts)?;
    Ok(ExceptionalPoint {
        location: vec![z.lambda],
        energy: cl.energy,
        order: cl.order,
        kind: cl.kind,
        level_indices: cl.cluster,
        defect_overlap: cl.defect_overlap,
        exponent: cl.exponent,
        residual: z.residual,
        iterations: z.iterations,
    })
}
