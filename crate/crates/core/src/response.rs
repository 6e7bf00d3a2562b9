//! Resolvent, pole structure at a coalescence, line shapes and propagation.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::finder::{ExceptionalPoint, FinderError, MatrixFamily};
use crate::linalg::{
    c, eigenvalues, expm, inner, jordan_cluster, norm2, singular_values, ComplexMatrix, LinalgError, Lu,
};
use crate::twolevel::TwoLevelParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResponseError {
    #[error("energy {energy} is a pole of the resolvent")]
    PoleHit { energy: Complex64 },
    #[error("expected an EP2, got {0}")]
    NotEp2(String),
    #[error("coalescing pair not isolated: nearest other level at {separation:.3e}, local scale {scale:.3e}")]
    NotIsolated { separation: f64, scale: f64 },
    #[error("eigenvalue {energy} has positive imaginary part")]
    Gain { energy: Complex64 },
    #[error("spectrum is real; line shapes need decaying levels")]
    RealSpectrum,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("Lorentz fit failed: {0}")]
    FitFailed(String),
    #[error(transparent)]
    Finder(#[from] FinderError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn resolvent(h: &ComplexMatrix, energy: Complex64) -> Result<ComplexMatrix, ResponseError> {
    let shifted = &ComplexMatrix::scalar(h.dim(), energy) - h;
    match Lu::factor(&shifted) {
        Ok(lu) => Ok(lu.inverse()),
        Err(LinalgError::Singular { .. }) => Err(ResponseError::PoleHit { energy }),
        Err(e) => Err(e.into()),
    }
}

/// `G(E) = (E − H(λ))⁻¹`.
pub fn greens(f: &MatrixFamily, lambda: Complex64, energy: Complex64) -> Result<ComplexMatrix, ResponseError> {
    resolvent(&f.at(lambda), energy)
}

/// Pole expansion `G(E)P = P/(E−E*) + N/(E−E*)² + regular` on the
/// coalescing subspace.
#[derive(Clone, Debug)]
pub struct GreensDecomposition {
    pub e_ep: Complex64,
    /// Projector onto the coalescing pair.
    pub first_order: ComplexMatrix,
    /// Nilpotent second-order coefficient.
    pub second_order: ComplexMatrix,
    pub members: Vec<usize>,
    /// `‖N‖`, the energy scale at which both poles are comparable.
    pub scale: f64,
    /// `‖N²‖/‖N‖²`.
    pub nilpotency: f64,
    /// Largest relative reconstruction error on the default test grid.
    pub reconstruction_error: f64,
}

impl GreensDecomposition {
    pub fn singular_part(&self, energy: Complex64) -> ComplexMatrix {
        let d = energy - self.e_ep;
        &self.first_order.scale(1.0 / d) + &self.second_order.scale(1.0 / (d * d))
    }

    /// Test energies at `|E − E*| ∈ [0.1, 10]·scale` on five rays.
    pub fn test_grid(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(25);
        for k in 0..5 {
            let r = self.scale * 10f64.powf(-1.0 + 0.5 * k as f64);
            for j in 0..5 {
                let theta = 0.3 + std::f64::consts::TAU * j as f64 / 5.0;
                out.push(self.e_ep + Complex64::from_polar(r, theta));
            }
        }
        out
    }

    /// `max ‖G(E)P − singular(E)‖/‖singular(E)‖` over `energies`.
    pub fn max_reconstruction_error(&self, h: &ComplexMatrix, energies: &[Complex64]) -> Result<f64, ResponseError> {
        let mut worst = 0.0f64;
        for &e in energies {
            let gp = &resolvent(h, e)? * &self.first_order;
            let s = self.singular_part(e);
            worst = worst.max((&gp - &s).norm_fro() / s.norm_fro());
        }
        Ok(worst)
    }
}

pub fn pole_decomposition(f: &MatrixFamily, ep: &ExceptionalPoint) -> Result<GreensDecomposition, ResponseError> {
    if ep.order != 2 {
        return Err(ResponseError::NotEp2(format!("order {}", ep.order)));
    }
    let h = f.evaluate(&ep.location)?;
    let cl = jordan_cluster(&h, ep.energy)?;
    if cl.size() != 2 {
        return Err(ResponseError::NotEp2(format!("cluster of {} levels", cl.size())));
    }
    let nnorm = cl.nilpotent.norm_fro();
    let sv = singular_values(&cl.nilpotent)?;
    if !(nnorm > 1e-10 * h.norm_fro().max(1.0)) || sv.get(1).is_some_and(|&s| s > 1e-8 * sv[0]) {
        return Err(ResponseError::NotEp2("nilpotent part is not rank one".into()));
    }
    let radius = cl
        .eigenvalues
        .iter()
        .map(|e| (e - cl.energy).norm())
        .fold(0.0, f64::max);
    let scale = nnorm.max(radius);
    let eigs = eigenvalues(&h)?;
    let separation = (0..eigs.len())
        .filter(|k| !cl.members.contains(k))
        .map(|k| (eigs[k] - cl.energy).norm())
        .fold(f64::INFINITY, f64::min);
    if separation <= 10.0 * scale {
        return Err(ResponseError::NotIsolated { separation, scale });
    }
    let mut d = GreensDecomposition {
        e_ep: cl.energy,
        nilpotency: cl.nilpotency_ratio(),
        first_order: cl.projector,
        second_order: cl.nilpotent,
        members: cl.members,
        scale,
        reconstruction_error: 0.0,
    };
    d.reconstruction_error = d.max_reconstruction_error(&h, &d.test_grid())?;
    Ok(d)
}

/// `σ(E) = |⟨f|G(E)|i⟩|²` on a real energy grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LineShape {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub channel_in: Vec<Complex64>,
    pub channel_out: Vec<Complex64>,
}

pub fn cross_section(
    f: &MatrixFamily,
    lambda: Complex64,
    channel_in: &[Complex64],
    channel_out: &[Complex64],
    grid: &[f64],
) -> Result<LineShape, ResponseError> {
    let h = f.at(lambda);
    let n = h.dim();
    if channel_in.len() != n || channel_out.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: if channel_in.len() != n { channel_in.len() } else { channel_out.len() },
        }
        .into());
    }
    if grid.is_empty() || grid.iter().any(|e| !e.is_finite()) {
        return Err(ResponseError::InvalidInput("energy grid must be non-empty and finite".into()));
    }
    let eigs = eigenvalues(&h)?;
    let tol = 1e-12 * h.norm_fro().max(1.0);
    if let Some(e) = eigs.iter().find(|e| e.im > tol) {
        return Err(ResponseError::Gain { energy: *e });
    }
    if eigs.iter().all(|e| e.im.abs() <= tol) {
        return Err(ResponseError::RealSpectrum);
    }
    let values = grid
        .par_iter()
        .map(|&e| {
            let shifted = &ComplexMatrix::scalar(n, c(e, 0.0)) - &h;
            let lu = Lu::factor(&shifted).map_err(|_| ResponseError::PoleHit { energy: c(e, 0.0) })?;
            let gi = lu.solve(channel_in);
            Ok(inner(channel_out, &gi).norm_sqr())
        })
        .collect::<Result<Vec<f64>, ResponseError>>()?;
    Ok(LineShape {
        energies: grid.to_vec(),
        values,
        channel_in: channel_in.to_vec(),
        channel_out: channel_out.to_vec(),
    })
}

/// Fit of `A·(Γ/2)²/((E−E₀)² + (Γ/2)²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzFit {
    pub center: f64,
    /// Full width `Γ`.
    pub width: f64,
    pub amplitude: f64,
    /// RMS misfit divided by the peak value of the data.
    pub residual: f64,
    pub iterations: usize,
}

impl LorentzFit {
    pub fn half_width(&self) -> f64 {
        0.5 * self.width
    }

    pub fn eval(&self, e: f64) -> f64 {
        lorentz(e, self.center, self.half_width(), self.amplitude)
    }
}

fn lorentz(e: f64, e0: f64, h: f64, a: f64) -> f64 {
    a * h * h / ((e - e0).powi(2) + h * h)
}

/// Levenberg-Marquardt fit of a single Lorentzian.
pub fn lorentz_fit(shape: &LineShape) -> Result<LorentzFit, ResponseError> {
    let x = &shape.energies;
    let y = &shape.values;
    if x.len() < 20 || x.len() != y.len() {
        return Err(ResponseError::FitFailed(format!("need ≥ 20 points, got {}", x.len())));
    }
    if y.iter().chain(x).any(|v| !v.is_finite()) || y.iter().any(|&v| v < 0.0) {
        return Err(ResponseError::FitFailed("non-finite or negative data".into()));
    }
    let peak = y.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(ResponseError::FitFailed("no signal".into()));
    }
    let (xmin, xmax) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = xmax - xmin;
    let ys: Vec<f64> = y.iter().map(|v| v / peak).collect();

    // Initial guess from the peak and the half-maximum crossings.
    let imax = (0..ys.len()).max_by(|&a, &b| ys[a].total_cmp(&ys[b])).expect("non-empty");
    let above: Vec<f64> = x.iter().zip(&ys).filter(|(_, &v)| v >= 0.5).map(|(e, _)| *e).collect();
    let above_hi = above.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let above_lo = above.iter().cloned().fold(f64::INFINITY, f64::min);
    let hw0 = 0.5 * (above_hi - above_lo).max(span / x.len() as f64);
    let mut p = [x[imax], hw0, 1.0];

    let cost = |p: &[f64; 3]| -> f64 {
        x.iter()
            .zip(&ys)
            .map(|(&e, &v)| (v - lorentz(e, p[0], p[1], p[2])).powi(2))
            .sum()
    };
    let mut current = cost(&p);
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..2000 {
        iterations = it + 1;
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for (&e, &v) in x.iter().zip(&ys) {
            let (e0, h, a) = (p[0], p[1], p[2]);
            let u = e - e0;
            let d = u * u + h * h;
            let m = a * h * h / d;
            let g = [a * h * h * 2.0 * u / (d * d), 2.0 * a * h * u * u / (d * d), h * h / d];
            let r = v - m;
            for i in 0..3 {
                jtr[i] += g[i] * r;
                for j in 0..3 {
                    jtj[i][j] += g[i] * g[j];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += mu * jtj[i][i].max(1e-300);
            }
            let Some(step) = solve3(a, jtr) else {
                mu *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            let tc = cost(&trial);
            if tc.is_finite() && tc <= current {
                let small = step.iter().zip(&trial).all(|(s, t)| s.abs() <= 1e-14 * (t.abs() + span));
                let flat = current - tc <= 1e-30 + 1e-15 * current;
                p = trial;
                current = tc;
                mu = (mu / 10.0).max(1e-15);
                accepted = true;
                if small || flat {
                    converged = true;
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    let half = p[1].abs();
    if !converged || !p.iter().all(|v| v.is_finite()) || !(half > 0.0) {
        return Err(ResponseError::FitFailed("iteration did not converge".into()));
    }
    if span < 4.0 * 2.0 * half {
        return Err(ResponseError::FitFailed(format!(
            "grid spans {span:.3e}, less than four fitted widths {:.3e}",
            2.0 * half
        )));
    }
    Ok(LorentzFit {
        center: p[0],
        width: 2.0 * half,
        amplitude: p[2] * peak,
        residual: (current / x.len() as f64).sqrt(),
        iterations,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[piv][col].abs() > 0.0) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let m = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// `ψ(t) = exp(−iHt)ψ₀`.
pub fn propagate(h: &ComplexMatrix, psi0: &[Complex64], t: f64) -> Result<Vec<Complex64>, ResponseError> {
    if psi0.len() != h.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: h.dim(),
            got: psi0.len(),
        }
        .into());
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(ResponseError::InvalidInput(format!("time {t} must be finite and non-negative")));
    }
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    let u = expm(&h.scale(c(0.0, -t)))?;
    Ok(u.matvec(psi0))
}

/// Componentwise least-squares fit `ψ(t)·e^{iE*t} = a + b·t`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    pub offset: Vec<Complex64>,
    pub slope: Vec<Complex64>,
    /// Largest misfit relative to `max_t ‖ψ(t)e^{iE*t}‖`.
    pub residual: f64,
}

impl GrowthFit {
    pub fn slope_norm(&self) -> f64 {
        norm2(&self.slope)
    }
}

pub fn linear_growth_fit(
    h: &ComplexMatrix,
    psi0: &[Complex64],
    e_star: Complex64,
    times: &[f64],
) -> Result<GrowthFit, ResponseError> {
    if times.len() < 3 {
        return Err(ResponseError::InvalidInput("need at least three times".into()));
    }
    let reduced: Vec<Vec<Complex64>> = times
        .iter()
        .map(|&t| {
            let phase = (c(0.0, 1.0) * e_star * t).exp();
            propagate(h, psi0, t).map(|v| v.into_iter().map(|z| z * phase).collect())
        })
        .collect::<Result<_, _>>()?;
    let m = times.len() as f64;
    let tm = times.iter().sum::<f64>() / m;
    let stt: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    if !(stt > 0.0) {
        return Err(ResponseError::InvalidInput("times must not all coincide".into()));
    }
    let n = psi0.len();
    let mut offset = Vec::with_capacity(n);
    let mut slope = Vec::with_capacity(n);
    for k in 0..n {
        let ym = reduced.iter().map(|v| v[k]).sum::<Complex64>() / m;
        let sty: Complex64 = times.iter().zip(&reduced).map(|(t, v)| (v[k] - ym) * (t - tm)).sum();
        let b = sty / stt;
        slope.push(b);
        offset.push(ym - b * tm);
    }
    let size = reduced.iter().map(|v| norm2(v)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let residual = times
        .iter()
        .zip(&reduced)
        .map(|(&t, v)| {
            let r: Vec<Complex64> = (0..n).map(|k| v[k] - offset[k] - slope[k] * t).collect();
            norm2(&r)
        })
        .fold(0.0, f64::max)
        / size;
    Ok(GrowthFit {
        offset,
        slope,
        residual,
    })
}

/// Decaying two-level demonstration configuration tuned to one of its EPs.
#[derive(Clone, Debug, PartialEq)]
pub struct OpenDimer {
    pub params: TwoLevelParams,
    pub lambda_ep: Complex64,
    pub energy: Complex64,
    /// Eigenvector at the EP.
    pub phi: [Complex64; 2],
    /// Channel orthogonal to `phi`, for which `⟨f|N|i⟩ = 0`.
    pub perpendicular: [Complex64; 2],
}

/// `ω = (1 − 0.3i, −1 − 0.1i)`, `ε = 0`, `δ₁ = δ₂ = ½`, at `λ = −0.2 − 2i`.
pub fn open_dimer() -> OpenDimer {
    let params = TwoLevelParams::new(
        [c(1.0, -0.3), c(-1.0, -0.1)],
        [c(0.0, 0.0); 2],
        [c(0.5, 0.0); 2],
    );
    let lambda_ep = c(-0.2, -2.0);
    let energy = 0.5 * (params.omega[0] + params.omega[1]);
    // (H − E*)φ = 0 from the first row: (ω₁ − E*)φ₁ + λδ₁φ₂ = 0.
    let phi1 = -lambda_ep * params.delta[0];
    let phi2 = params.omega[0] - energy;
    let s = (phi1.norm_sqr() + phi2.norm_sqr()).sqrt();
    let phi = [phi1 / s, phi2 / s];
    OpenDimer {
        params,
        lambda_ep,
        energy,
        phi,
        perpendicular: [phi[1].conj(), -phi[0].conj()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finder::refine_ep;

    #[test]
    fn diagonal_greens() {
        let f = TwoLevelParams::canonical_dimer().family();
        let g = greens(&f, c(0.0, 0.0), c(3.0, 0.0)).unwrap();
        assert!((g[(0, 0)] - 0.5).norm() < 1e-15);
        assert!((g[(1, 1)] - 1.0 / 3.0).norm() < 1e-15);
        assert!(g[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn pole_hit() {
        let f = TwoLevelParams::canonical_dimer().family();
        assert!(matches!(
            greens(&f, c(0.0, 0.0), c(1.0, 0.0)),
            Err(ResponseError::PoleHit { .. })
        ));
    }

    #[test]
    fn dimer_second_order_coefficient() {
        let f = TwoLevelParams::canonical_dimer().family();
        let ep = refine_ep(&f, c(0.0, -0.9)).unwrap();
        let d = pole_decomposition(&f, &ep).unwrap();
        let want = ComplexMatrix::from_rows(&[vec![c(0.5, 0.0), c(0.0, -0.5)], vec![c(0.0, -0.5), c(-0.5, 0.0)]]).unwrap();
        assert!((&d.second_order - &want).norm_fro() < 1e-9);
        assert!(d.reconstruction_error < 1e-9);
    }

    #[test]
    fn exact_lorentzian() {
        let grid: Vec<f64> = (0..201).map(|k| -5.0 + 0.05 * k as f64).collect();
        let values = grid.iter().map(|&e| lorentz(e, 0.3, 0.4, 2.0)).collect();
        let shape = LineShape {
            energies: grid,
            values,
            channel_in: vec![],
            channel_out: vec![],
        };
        let fit = lorentz_fit(&shape).unwrap();
        assert!(fit.residual < 1e-10);
        assert!((fit.half_width() - 0.4).abs() < 1e-9);
    }

    #[test]
    fn open_dimer_is_at_its_ep() {
        let od = open_dimer();
        let h = od.params.at(od.lambda_ep);
        let hv = h.matvec(&od.phi);
        for k in 0..2 {
            assert!((hv[k] - od.energy * od.phi[k]).norm() < 1e-14);
        }
    }
}
