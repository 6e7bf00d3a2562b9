use num_complex::Complex64;
use rayon::prelude::*;

use super::{
    classify_with, refine_location, scan_grid, EpKind, ExceptionalPoint, FinderError, FinderOptions, MatrixFamily,
    SearchRegion,
};
use crate::linalg::{cluster_around, eigenvalues};

/// Scan, refine every seed in parallel, classify, and deduplicate.
pub fn census(f: &MatrixFamily, r: &SearchRegion) -> Result<Vec<ExceptionalPoint>, FinderError> {
    census_with(f, r, &FinderOptions::default())
}

pub fn census_with(
    f: &MatrixFamily,
    r: &SearchRegion,
    opts: &FinderOptions,
) -> Result<Vec<ExceptionalPoint>, FinderError> {
    let seeds = scan_grid(f, r)?;
    let mut opts = *opts;
    if opts.max_step.is_none() {
        opts.max_step = Some(4.0 * r.step);
    }
    let found: Vec<Vec<ExceptionalPoint>> = seeds
        .par_iter()
        .map(|&seed| match refine_all(f, seed, &opts) {
            Ok(points) => points,
            Err(e) => {
                log::debug!("seed {seed} skipped: {e}");
                Vec::new()
            }
        })
        .collect();
    let margin = 1e-9 * (1.0 + r.lo.norm().max(r.hi.norm()));
    let mut all: Vec<ExceptionalPoint> = found
        .into_iter()
        .flatten()
        .filter(|ep| r.contains(ep.lambda(), margin))
        .collect();
    sort_points(&mut all);
    Ok(dedup(all, r.dedup_radius))
}

/// Refines one seed and classifies every cluster that coalesces at the
/// converged point.
pub fn refine_all(
    f: &MatrixFamily,
    seed: Complex64,
    opts: &FinderOptions,
) -> Result<Vec<ExceptionalPoint>, FinderError> {
    let z = refine_location(f, seed, opts)?;
    let mut out = Vec::new();
    for cluster in coalesced_clusters(f, z.lambda, opts)? {
        let ep = match classify_with(f, z.lambda, &cluster, opts) {
            Ok(cl) => ExceptionalPoint {
                location: vec![z.lambda],
                energy: cl.energy,
                order: cl.order,
                kind: cl.kind,
                level_indices: cl.cluster,
                defect_overlap: cl.defect_overlap,
                exponent: cl.exponent,
                residual: z.residual,
                iterations: z.iterations,
            },
            Err(e) => {
                log::debug!("classification at {} failed: {e}", z.lambda);
                let eigs = eigenvalues(&f.at(z.lambda))?;
                let energy = cluster.iter().map(|&k| eigs[k]).sum::<Complex64>() / cluster.len() as f64;
                ExceptionalPoint {
                    location: vec![z.lambda],
                    energy,
                    order: cluster.len(),
                    kind: EpKind::Unclassified,
                    level_indices: cluster,
                    defect_overlap: f64::NAN,
                    exponent: f64::NAN,
                    residual: z.residual,
                    iterations: z.iterations,
                }
            }
        };
        out.push(ep);
    }
    Ok(out)
}

/// Groups of levels that coincide at `λ`: every pair closer than
/// `max(10³·min gap, cluster_floor·‖H‖)`, grown to the full local cluster.
pub fn coalesced_clusters(
    f: &MatrixFamily,
    lambda: Complex64,
    opts: &FinderOptions,
) -> Result<Vec<Vec<usize>>, FinderError> {
    let h = f.at(lambda);
    let eigs = eigenvalues(&h)?;
    let n = eigs.len();
    let floor = opts.cluster_floor * h.norm_fro().max(1.0);
    let mut min_gap = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            min_gap = min_gap.min((eigs[a] - eigs[b]).norm());
        }
    }
    let tol = (1e3 * min_gap).max(floor);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut taken = vec![false; n];
    for a in 0..n {
        if taken[a] {
            continue;
        }
        if !(a + 1..n).any(|b| (eigs[a] - eigs[b]).norm() <= tol) {
            continue;
        }
        let grown = cluster_around(&eigs, eigs[a], tol);
        let grown: Vec<usize> = grown.into_iter().filter(|&k| !taken[k]).collect();
        if grown.len() < 2 {
            continue;
        }
        for &k in &grown {
            taken[k] = true;
        }
        clusters.push(grown);
    }
    Ok(clusters)
}

fn sort_points(points: &mut [ExceptionalPoint]) {
    points.sort_by(|a, b| {
        super::cmp_complex(&a.lambda(), &b.lambda()).then(super::cmp_complex(&a.energy, &b.energy))
    });
}

/// Keeps the first of any entries closer than `radius` in both λ and E.
fn dedup(points: Vec<ExceptionalPoint>, radius: f64) -> Vec<ExceptionalPoint> {
    let mut kept: Vec<ExceptionalPoint> = Vec::new();
    for p in points {
        let dup = kept.iter().any(|q| {
            (q.lambda() - p.lambda()).norm() <= radius * (1.0 + p.lambda().norm())
                && (q.energy - p.energy).norm() <= radius * (1.0 + p.energy.norm())
        });
        if !dup {
            kept.push(p);
        }
    }
    kept
}
