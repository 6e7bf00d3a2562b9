use num_complex::Complex64;
use rayon::prelude::*;

use super::{FinderError, MatrixFamily, SearchRegion};
use crate::linalg::{c, eigenvalues, log_discriminant};

/// Indicator values on the region grid, padded by one node on every side.
#[derive(Clone, Debug)]
pub struct GridValues {
    pub nx: usize,
    pub ny: usize,
    /// Node `(i, j)` sits at `origin + step·(i + j·i)`.
    pub origin: Complex64,
    pub step: f64,
    /// `ln|disc|`, row-major in `j`.
    pub log_disc: Vec<f64>,
    /// `ln` of the smallest squared pairwise gap.
    pub log_min_gap: Vec<f64>,
}

impl GridValues {
    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        self.origin + c(i as f64 * self.step, j as f64 * self.step)
    }
}

/// Evaluates both indicators on the padded grid in parallel.
pub fn indicator_grid(f: &MatrixFamily, r: &SearchRegion) -> Result<GridValues, FinderError> {
    r.validate()?;
    if f.n_params() != 1 {
        return Err(FinderError::NotSingleParameter);
    }
    let cells_x = ((r.hi.re - r.lo.re) / r.step).round().max(1.0) as usize;
    let cells_y = ((r.hi.im - r.lo.im) / r.step).round().max(1.0) as usize;
    let nx = cells_x + 3;
    let ny = cells_y + 3;
    let origin = r.lo - c(r.step, r.step);
    let values: Vec<(f64, f64)> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let lam = origin + c(i as f64 * r.step, j as f64 * r.step);
            match eigenvalues(&f.at(lam)) {
                Ok(e) => {
                    let ld = log_discriminant(&e).ln_abs;
                    let mut gmin = f64::INFINITY;
                    for a in 0..e.len() {
                        for b in a + 1..e.len() {
                            gmin = gmin.min((e[a] - e[b]).norm_sqr());
                        }
                    }
                    (ld, gmin.ln())
                }
                Err(_) => (f64::NAN, f64::NAN),
            }
        })
        .collect();
    Ok(GridValues {
        nx,
        ny,
        origin,
        step: r.step,
        log_disc: values.iter().map(|v| v.0).collect(),
        log_min_gap: values.iter().map(|v| v.1).collect(),
    })
}

/// Grid nodes inside the region where either indicator has a strict local
/// minimum over its eight neighbours. Sorted by (Re, Im).
pub fn scan_grid(f: &MatrixFamily, r: &SearchRegion) -> Result<Vec<Complex64>, FinderError> {
    let g = indicator_grid(f, r)?;
    let mut seeds = Vec::new();
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let z = g.node(i, j);
            if !r.contains(z, 1e-12 * r.step) {
                continue;
            }
            if is_strict_min(&g.log_disc, g.nx, i, j) || is_strict_min(&g.log_min_gap, g.nx, i, j) {
                seeds.push(z);
            }
        }
    }
    seeds.sort_by(super::cmp_complex);
    Ok(seeds)
}

fn is_strict_min(v: &[f64], nx: usize, i: usize, j: usize) -> bool {
    let center = v[j * nx + i];
    if center.is_nan() {
        return false;
    }
    let mut neigh = Vec::with_capacity(8);
    for dj in [-1i64, 0, 1] {
        for di in [-1i64, 0, 1] {
            if di == 0 && dj == 0 {
                continue;
            }
            let ii = (i as i64 + di) as usize;
            let jj = (j as i64 + dj) as usize;
            let x = v[jj * nx + ii];
            // NaN neighbours never win.
            if !x.is_nan() && x <= center {
                return false;
            }
            neigh.push(x);
        }
    }
    neigh.sort_by(|a, b| a.total_cmp(b));
    center < neigh[neigh.len() / 2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::twolevel::TwoLevelParams;

    #[test]
    fn dimer_seeds_near_both_eps() {
        let f = TwoLevelParams::canonical_dimer().family();
        let r = SearchRegion::new(c(-2.0, -2.0), c(2.0, 2.0), 0.05);
        let seeds = scan_grid(&f, &r).unwrap();
        for target in [c(0.0, -1.0), c(0.0, 1.0)] {
            assert!(seeds.iter().any(|s| (s - target).norm() <= 0.05 + 1e-12));
        }
    }

    #[test]
    fn constant_family_has_no_seeds() {
        let h0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let f = MatrixFamily::single(h0, ComplexMatrix::zeros(2)).unwrap();
        let r = SearchRegion::new(c(-1.0, -1.0), c(1.0, 1.0), 0.1);
        assert!(scan_grid(&f, &r).unwrap().is_empty());
    }

    #[test]
    fn empty_region_is_rejected() {
        let f = TwoLevelParams::canonical_dimer().family();
        let r = SearchRegion::new(c(1.0, 1.0), c(1.0, 2.0), 0.1);
        assert!(matches!(scan_grid(&f, &r), Err(FinderError::InvalidRegion(_))));
    }
}
