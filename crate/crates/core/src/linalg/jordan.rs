//! Coalescing clusters, their spectral projectors and nilpotent parts.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{eigenvalues, ComplexMatrix, LinalgError, Lu};

/// Spectral data of the eigenvalue cluster at a coalescence.
#[derive(Clone, Debug)]
pub struct JordanCluster {
    /// `tr(MP)/tr(P)`, the mean of the clustered eigenvalues.
    pub energy: Complex64,
    /// Positions of the cluster members in the sorted eigenvalue list.
    pub members: Vec<usize>,
    pub eigenvalues: Vec<Complex64>,
    pub projector: ComplexMatrix,
    /// `(M − energy)·P`.
    pub nilpotent: ComplexMatrix,
}

impl JordanCluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// `‖N²‖/‖N‖²`, zero when `N` vanishes.
    pub fn nilpotency_ratio(&self) -> f64 {
        let n = self.nilpotent.norm_fro();
        if n == 0.0 {
            return 0.0;
        }
        (&self.nilpotent * &self.nilpotent).norm_fro() / (n * n)
    }
}

/// Members of the eigenvalue cluster nearest `center`.
///
/// Starting from the closest eigenvalue, the next-closest joins while its
/// distance is within four times the current cluster radius plus `floor`.
pub fn cluster_around(eigs: &[Complex64], center: Complex64, floor: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eigs.len()).collect();
    order.sort_by(|&a, &b| {
        (eigs[a] - center)
            .norm()
            .total_cmp(&(eigs[b] - center).norm())
            .then(a.cmp(&b))
    });
    let mut members = Vec::new();
    let mut radius = 0.0f64;
    for &k in &order {
        let d = (eigs[k] - center).norm();
        if members.is_empty() || d <= 4.0 * radius + floor {
            members.push(k);
            radius = radius.max(d);
        } else {
            break;
        }
    }
    members.sort_unstable();
    members
}

/// Riesz projector onto the eigenvalues listed in `members`, by trapezoidal
/// quadrature of the resolvent on a circle separating them from the rest.
pub fn spectral_projector(
    m: &ComplexMatrix,
    eigs: &[Complex64],
    members: &[usize],
) -> Result<ComplexMatrix, LinalgError> {
    let n = m.dim();
    if members.len() == eigs.len() {
        return Ok(ComplexMatrix::identity(n));
    }
    let center = members.iter().map(|&k| eigs[k]).sum::<Complex64>() / members.len() as f64;
    let r_in = members
        .iter()
        .map(|&k| (eigs[k] - center).norm())
        .fold(0.0, f64::max);
    let r_out = (0..eigs.len())
        .filter(|k| !members.contains(k))
        .map(|k| (eigs[k] - center).norm())
        .fold(f64::INFINITY, f64::min);
    let r_in_eff = r_in.max(1e-6 * r_out);
    let rho = (r_in_eff * r_out).sqrt();
    let q = (r_in_eff / r_out).sqrt();
    let nodes = ((18.0 * 10f64.ln() / -q.ln()).ceil() as usize).clamp(16, 4096);
    let nodes = nodes.div_ceil(4) * 4;

    let mut p = ComplexMatrix::zeros(n);
    for k in 0..nodes {
        let theta = 2.0 * PI * (k as f64) / (nodes as f64);
        let w = Complex64::from_polar(rho, theta);
        let z = center + w;
        let shifted = &ComplexMatrix::scalar(n, z) - m;
        let lu = Lu::factor(&shifted)?;
        let inv = lu.inverse();
        // dz/(2πi) over one node is w/nodes.
        let weight = w / nodes as f64;
        p = &p + &inv.scale(weight);
    }
    Ok(p)
}

/// Cluster at `e_ep`, with projector and nilpotent part.
pub fn jordan_cluster(m: &ComplexMatrix, e_ep: Complex64) -> Result<JordanCluster, LinalgError> {
    let eigs = eigenvalues(m)?;
    let floor = 1e-6 * m.norm_fro().max(1.0);
    let members = cluster_around(&eigs, e_ep, floor);
    let projector = spectral_projector(m, &eigs, &members)?;
    let mp = m * &projector;
    let energy = mp.trace() / projector.trace();
    let nilpotent = &mp - &projector.scale(energy);
    Ok(JordanCluster {
        energy,
        eigenvalues: members.iter().map(|&k| eigs[k]).collect(),
        members,
        projector,
        nilpotent,
    })
}

/// Nilpotent part `N = (M − E)P` of a size-2 Jordan block at `e_ep`.
///
/// A semisimple cluster returns `N = 0`. An isolated simple eigenvalue, or a
/// cluster whose `N²` does not vanish, is `NotDefective`.
pub fn nilpotent_part(m: &ComplexMatrix, e_ep: Complex64) -> Result<ComplexMatrix, LinalgError> {
    let cl = jordan_cluster(m, e_ep)?;
    if cl.size() < 2 {
        return Err(LinalgError::NotDefective { ratio: f64::NAN });
    }
    if cl.nilpotent.norm_fro() <= 1e-10 * m.norm_fro().max(1.0) {
        return Ok(ComplexMatrix::zeros(m.dim()));
    }
    let ratio = cl.nilpotency_ratio();
    if ratio > 1e-6 {
        return Err(LinalgError::NotDefective { ratio });
    }
    Ok(cl.nilpotent)
}
