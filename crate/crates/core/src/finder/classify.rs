use num_complex::Complex64;

use super::{EpKind, FinderError, FinderOptions, MatrixFamily};
use crate::linalg::eig;

/// One point of the approach sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproachSample {
    pub distance: f64,
    /// Largest pairwise distance within the tracked cluster.
    pub gap: f64,
    /// Smallest `|ψ̃·ψ|` within the cluster, unit vectors.
    pub overlap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub kind: EpKind,
    pub order: usize,
    pub cluster: Vec<usize>,
    /// Cluster mean at λ*.
    pub energy: Complex64,
    pub defect_overlap: f64,
    /// Smallest overlap at λ* itself.
    pub endpoint_overlap: f64,
    pub exponent: f64,
    pub samples: Vec<ApproachSample>,
}

const APPROACH_DECADES: std::ops::RangeInclusive<i32> = 2..=7;
const CLEAN_OVERLAP: f64 = 1e-4;
const SEMISIMPLE_OVERLAP: f64 = 1e-3;

pub fn classify(f: &MatrixFamily, lambda: Complex64, cluster: &[usize]) -> Result<Classification, FinderError> {
    classify_with(f, lambda, cluster, &FinderOptions::default())
}

/// Classifies the coalescence of the levels `cluster` (positions in the
/// sorted spectrum of `H(λ*)`) from how they split along
/// `λ* + approach_scale·10^{-k}·direction`.
pub fn classify_with(
    f: &MatrixFamily,
    lambda: Complex64,
    cluster: &[usize],
    opts: &FinderOptions,
) -> Result<Classification, FinderError> {
    let h = f.at(lambda);
    let n = h.dim();
    if cluster.len() < 2 || cluster.iter().any(|&k| k >= n) {
        return Err(FinderError::InvalidCluster(format!(
            "need at least two valid level indices below {n}, got {cluster:?}"
        )));
    }
    let sys = eig(&h)?;
    let energy = cluster.iter().map(|&k| sys.eigenvalues[k]).sum::<Complex64>() / cluster.len() as f64;
    let radius = cluster
        .iter()
        .map(|&k| (sys.eigenvalues[k] - energy).norm())
        .fold(0.0, f64::max);
    let floor = opts.cluster_floor * h.norm_fro().max(1.0);
    let crowd = (0..n)
        .filter(|&k| (sys.eigenvalues[k] - energy).norm() <= 4.0 * radius + floor)
        .count();
    if crowd > cluster.len() {
        return Err(FinderError::ClusterAmbiguous {
            requested: cluster.len(),
            found: crowd,
        });
    }
    let endpoint_overlap = cluster
        .iter()
        .map(|&k| sys.overlaps[k].norm())
        .fold(f64::INFINITY, f64::min);

    let dir = opts.approach_direction / opts.approach_direction.norm();
    let mut samples = Vec::new();
    for k in APPROACH_DECADES {
        let distance = opts.approach_scale * 10f64.powi(-k);
        let s = eig(&f.at(lambda + dir * distance))?;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            (s.eigenvalues[a] - energy)
                .norm()
                .total_cmp(&(s.eigenvalues[b] - energy).norm())
                .then(a.cmp(&b))
        });
        let chosen = &idx[..cluster.len()];
        let mut gap = 0.0f64;
        for (p, &a) in chosen.iter().enumerate() {
            for &b in &chosen[p + 1..] {
                gap = gap.max((s.eigenvalues[a] - s.eigenvalues[b]).norm());
            }
        }
        let overlap = chosen
            .iter()
            .map(|&a| s.overlaps[a].norm())
            .fold(f64::INFINITY, f64::min);
        samples.push(ApproachSample {
            distance,
            gap,
            overlap,
        });
    }
    let defect_overlap = samples.iter().map(|s| s.overlap).fold(endpoint_overlap, f64::min);
    let exponent = log_slope(&samples);
    let kind = decide(cluster.len(), exponent, defect_overlap);
    Ok(Classification {
        kind,
        order: cluster.len(),
        cluster: cluster.to_vec(),
        energy,
        defect_overlap,
        endpoint_overlap,
        exponent,
        samples,
    })
}

/// Least-squares slope of `ln gap` against `ln distance`; NaN when fewer
/// than two gaps are positive.
fn log_slope(samples: &[ApproachSample]) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.gap > 0.0)
        .map(|s| (s.distance.ln(), s.gap.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn decide(size: usize, exponent: f64, overlap: f64) -> EpKind {
    if !exponent.is_finite() {
        return if overlap >= SEMISIMPLE_OVERLAP {
            EpKind::Semisimple
        } else {
            EpKind::Unclassified
        };
    }
    let target = 1.0 / size as f64;
    if (exponent - target).abs() <= 0.1 * target && overlap < CLEAN_OVERLAP {
        return if size == 2 { EpKind::Ep2 } else { EpKind::EpN };
    }
    if (exponent - 1.0).abs() <= 0.1 {
        return if overlap >= SEMISIMPLE_OVERLAP {
            EpKind::Semisimple
        } else {
            EpKind::NonDiagonalizableCrossing
        };
    }
    EpKind::Unclassified
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ComplexMatrix};

    #[test]
    fn constant_identity_family_is_semisimple() {
        let f = MatrixFamily::single(ComplexMatrix::identity(2), ComplexMatrix::zeros(2)).unwrap();
        let cl = classify(&f, c(0.3, 0.1), &[0, 1]).unwrap();
        assert_eq!(cl.kind, EpKind::Semisimple);
        assert!((cl.defect_overlap - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crossing_diagonal_family_has_unit_exponent() {
        let f = MatrixFamily::single(
            ComplexMatrix::zeros(2),
            ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
        )
        .unwrap();
        let cl = classify(&f, c(0.0, 0.0), &[0, 1]).unwrap();
        assert_eq!(cl.kind, EpKind::Semisimple);
        assert!((cl.exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_small_cluster_is_ambiguous() {
        let f = MatrixFamily::single(ComplexMatrix::identity(3), ComplexMatrix::zeros(3)).unwrap();
        assert!(matches!(
            classify(&f, c(0.0, 0.0), &[0, 1]),
            Err(FinderError::ClusterAmbiguous { requested: 2, found: 3 })
        ));
    }
}
