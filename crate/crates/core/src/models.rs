//! Concrete families: the Lipkin model, a gain/loss dimer, an RPA block,
//! the quasi-Hermitian metric, and a three-level family built on a Jordan block.

use num_complex::Complex64;
use thiserror::Error;

use crate::finder::{
    census_with, refine_all, refine_ep_with, EpKind, ExceptionalPoint, FinderError, FinderOptions, MatrixFamily, SearchRegion,
};
use crate::linalg::{
    biorthogonalize, c, eig, eigenvalues, hermitian_eig, hpd_sqrt, ComplexMatrix, LinalgError, Lu,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("particle number {0} must be even and in [2, 64]")]
    InvalidN(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("spectrum is not real (largest |Im E| = {max_imag:.3e})")]
    BrokenPhase { max_imag: f64 },
    #[error("metric is ill-defined near a coalescence (condition {condition:.3e})")]
    MetricBlowup { condition: f64 },
    #[error("no change of reality found on [0, {upper}]")]
    NoThreshold { upper: f64 },
    #[error(transparent)]
    Finder(#[from] FinderError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Spin-`j` matrices in the basis `m = −j, …, j` (index `m + j`).
#[derive(Clone, Debug, PartialEq)]
pub struct LipkinSpec {
    pub n: usize,
    pub j: f64,
    pub jz: ComplexMatrix,
    pub jplus: ComplexMatrix,
    pub jminus: ComplexMatrix,
}

impl LipkinSpec {
    pub fn new(n: usize) -> Result<Self, ModelError> {
        if !(2..=64).contains(&n) || !n.is_multiple_of(2) {
            return Err(ModelError::InvalidN(n));
        }
        let j = n as f64 / 2.0;
        let dim = n + 1;
        let m = |k: usize| k as f64 - j;
        let jz = ComplexMatrix::from_diag(&(0..dim).map(|k| c(m(k), 0.0)).collect::<Vec<_>>());
        let mut jplus = ComplexMatrix::zeros(dim);
        for k in 0..dim - 1 {
            jplus[(k + 1, k)] = c((j * (j + 1.0) - m(k) * (m(k) + 1.0)).sqrt(), 0.0);
        }
        let jminus = jplus.transpose();
        Ok(Self {
            n,
            j,
            jz,
            jplus,
            jminus,
        })
    }

    /// Largest of `‖[Jz, J±] ∓ J±‖` and `‖[J+, J−] − 2Jz‖`.
    pub fn algebra_residual(&self) -> f64 {
        let a = (&self.jz.commutator(&self.jplus) - &self.jplus).max_abs();
        let b = (&self.jz.commutator(&self.jminus) + &self.jminus).max_abs();
        let d = (&self.jplus.commutator(&self.jminus) - &self.jz.scale(c(2.0, 0.0))).max_abs();
        a.max(b).max(d)
    }

    /// `(J+² + J−²)/N`.
    pub fn interaction(&self) -> ComplexMatrix {
        let p2 = &self.jplus * &self.jplus;
        let m2 = &self.jminus * &self.jminus;
        (&p2 + &m2).scale(c(1.0 / self.n as f64, 0.0))
    }
}

/// Sectors of even and odd `m + j`, decoupled because `J±²` shifts `m` by 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipkinModel {
    pub spec: LipkinSpec,
    /// `H(λ) = Jz + λ(J+² + J−²)/N`.
    pub full: MatrixFamily,
    pub even: MatrixFamily,
    pub odd: MatrixFamily,
    /// Full-basis indices of each block's basis.
    pub even_basis: Vec<usize>,
    pub odd_basis: Vec<usize>,
}

impl LipkinModel {
    pub fn block(&self, parity: Parity) -> &MatrixFamily {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }
}

fn restrict(m: &ComplexMatrix, basis: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(basis.len(), |a, b| m[(basis[a], basis[b])])
}

pub fn lipkin(n: usize) -> Result<LipkinModel, ModelError> {
    let spec = LipkinSpec::new(n)?;
    let v = spec.interaction();
    let full = MatrixFamily::single(spec.jz.clone(), v.clone())?;
    let even_basis: Vec<usize> = (0..=n).filter(|k| k % 2 == 0).collect();
    let odd_basis: Vec<usize> = (0..=n).filter(|k| k % 2 == 1).collect();
    let even = MatrixFamily::single(restrict(&spec.jz, &even_basis), restrict(&v, &even_basis))?;
    let odd = MatrixFamily::single(restrict(&spec.jz, &odd_basis), restrict(&v, &odd_basis))?;
    Ok(LipkinModel {
        spec,
        full,
        even,
        odd,
        even_basis,
        odd_basis,
    })
}

/// First-quadrant region with the imaginary axis excluded; the grid step
/// shrinks with `N` because the coalescences crowd towards `λ = 1`.
pub fn lipkin_default_region(n: usize) -> SearchRegion {
    let step = match n {
        0..=8 => 0.02,
        9..=16 => 0.01,
        _ => 0.005,
    };
    SearchRegion::new(c(0.02, 0.0), c(2.0, 2.0), step)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipkinEp {
    pub ep: ExceptionalPoint,
    pub block: Parity,
    /// Found as a symmetry image of a point inside the region.
    pub from_symmetry: bool,
    /// Distance from the coalesced energy to the other block's spectrum.
    pub other_block_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipkinCensus {
    pub n: usize,
    pub points: Vec<LipkinEp>,
    /// `max_p max_σ min_q |σ(λ_p) − λ_q|` over `σ ∈ {λ*, −λ, −λ*}`, within blocks.
    pub closure_defect: f64,
    /// `min |λ − 1|`.
    pub distance_to_one: f64,
}

pub fn quartet(lambda: Complex64) -> [Complex64; 3] {
    [lambda.conj(), -lambda, -lambda.conj()]
}

/// Block-wise census over `region`, completed to the full plane by refining
/// every quartet image as an independent seed.
pub fn lipkin_census(n: usize, region: &SearchRegion) -> Result<LipkinCensus, ModelError> {
    let model = lipkin(n)?;
    let opts = FinderOptions {
        max_step: Some(4.0 * region.step),
        ..FinderOptions::default()
    };
    let mut points: Vec<LipkinEp> = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let f = model.block(parity);
        if f.dim() < 2 {
            continue;
        }
        let other = eigenvalues_or_empty(model.block(match parity {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }));
        let mut block_points: Vec<(ExceptionalPoint, bool)> = census_with(f, region, &opts)?
            .into_iter()
            .map(|e| (e, false))
            .collect();
        let originals: Vec<Complex64> = block_points.iter().map(|(e, _)| e.lambda()).collect();
        for lam in originals {
            for image in quartet(lam) {
                let found = match refine_all(f, image, &opts) {
                    Ok(found) => found,
                    Err(err) => {
                        log::debug!("image {image} of {lam} did not refine: {err}");
                        continue;
                    }
                };
                for e in found {
                    let known = block_points.iter().any(|(q, _)| {
                        (q.lambda() - e.lambda()).norm() <= region.dedup_radius * (1.0 + e.lambda().norm())
                            && (q.energy - e.energy).norm() <= region.dedup_radius * (1.0 + e.energy.norm())
                    });
                    if !known {
                        block_points.push((e, true));
                    }
                }
            }
        }
        for (ep, from_symmetry) in block_points {
            let other_block_gap = other(&ep.location).map_or(f64::INFINITY, |eigs| {
                eigs.iter().map(|e| (e - ep.energy).norm()).fold(f64::INFINITY, f64::min)
            });
            points.push(LipkinEp {
                ep,
                block: parity,
                from_symmetry,
                other_block_gap,
            });
        }
    }
    points.sort_by(|a, b| {
        crate::finder::cmp_complex(&a.ep.lambda(), &b.ep.lambda())
            .then(a.block.cmp(&b.block))
            .then(crate::finder::cmp_complex(&a.ep.energy, &b.ep.energy))
    });
    let mut closure_defect = 0.0f64;
    for p in &points {
        for image in quartet(p.ep.lambda()) {
            let d = points
                .iter()
                .filter(|q| q.block == p.block)
                .map(|q| (q.ep.lambda() - image).norm())
                .fold(f64::INFINITY, f64::min);
            closure_defect = closure_defect.max(d);
        }
    }
    let distance_to_one = points
        .iter()
        .map(|p| (p.ep.lambda() - 1.0).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(LipkinCensus {
        n,
        points,
        closure_defect,
        distance_to_one,
    })
}

type SpectrumAt<'a> = Box<dyn Fn(&[Complex64]) -> Option<Vec<Complex64>> + 'a>;

fn eigenvalues_or_empty(f: &MatrixFamily) -> SpectrumAt<'_> {
    Box::new(move |loc| f.evaluate(loc).ok().and_then(|h| eigenvalues(&h).ok()))
}

/// `H(γ) = [[iγ, κ], [κ, −iγ]]`.
pub fn pt_dimer(kappa: f64) -> Result<MatrixFamily, ModelError> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("κ = {kappa} must be positive")));
    }
    let h0 = ComplexMatrix::from_real_rows(&[&[0.0, kappa], &[kappa, 0.0]]);
    let v = ComplexMatrix::from_diag(&[c(0.0, 1.0), c(0.0, -1.0)]);
    Ok(MatrixFamily::single(h0, v)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtThreshold {
    /// Midpoint of the final bisection bracket.
    pub gamma: f64,
    pub bracket: (f64, f64),
    pub bisection_steps: usize,
    /// The refined and classified coalescence at the threshold.
    pub ep: ExceptionalPoint,
}

fn all_real(f: &MatrixFamily, gamma: f64) -> Result<bool, ModelError> {
    let h = f.at(c(gamma, 0.0));
    let tol = 1e-7 * h.norm_fro().max(1.0);
    Ok(eigenvalues(&h)?.iter().all(|e| e.im.abs() <= tol))
}

/// Bisection on "all eigenvalues real" over `γ ∈ [0, 2κ]`, then Newton
/// refinement and classification at the boundary.
pub fn pt_threshold(kappa: f64) -> Result<PtThreshold, ModelError> {
    let f = pt_dimer(kappa)?;
    let (mut lo, mut hi) = (0.0, 2.0 * kappa);
    if !all_real(&f, lo)? || all_real(&f, hi)? {
        return Err(ModelError::NoThreshold { upper: hi });
    }
    let mut steps = 0;
    while hi - lo > 1e-13 * kappa && steps < 200 {
        let mid = 0.5 * (lo + hi);
        if all_real(&f, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let gamma = 0.5 * (lo + hi);
    let ep = refine_ep_with(&f, c(gamma, 0.0), &FinderOptions::default())?;
    Ok(PtThreshold {
        gamma,
        bracket: (lo, hi),
        bisection_steps: steps,
        ep,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricResult {
    /// `Θ = Σ ψ̃_k† ψ̃_k` with `ψ̃_k ψ_j = δ_kj`.
    pub theta: ComplexMatrix,
    /// Positive square root of `Θ`.
    pub s: ComplexMatrix,
    pub condition: f64,
    pub min_eigenvalue: f64,
    /// `‖ΘH − H†Θ‖`.
    pub intertwining_residual: f64,
    /// `‖h − h†‖` for `h = S H S⁻¹`.
    pub hermiticity_residual: f64,
}

const METRIC_CONDITION_LIMIT: f64 = 1e13;

pub fn quasi_metric(h: &ComplexMatrix) -> Result<MetricResult, ModelError> {
    h.check_finite()?;
    let sys = eig(h)?;
    let scale = h.norm_fro().max(1.0);
    let max_imag = sys.eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
    if max_imag > 1e-10 * scale {
        return Err(ModelError::BrokenPhase { max_imag });
    }
    let bi = match biorthogonalize(&sys, 1e-12) {
        Ok(b) => b,
        Err(LinalgError::NearDefective { overlap, .. }) => {
            return Err(ModelError::MetricBlowup {
                condition: 1.0 / (overlap * overlap),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let n = h.dim();
    let theta = ComplexMatrix::from_fn(n, |a, b| {
        bi.left_vectors
            .iter()
            .map(|l| l[a].conj() * l[b])
            .sum()
    });
    let he = hermitian_eig(&theta)?;
    let min_eigenvalue = he.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_eigenvalue = he.values.iter().cloned().fold(0.0, f64::max);
    let condition = max_eigenvalue / min_eigenvalue;
    if !(min_eigenvalue > 0.0) || !(condition < METRIC_CONDITION_LIMIT) {
        return Err(ModelError::MetricBlowup {
            condition: if min_eigenvalue > 0.0 { condition } else { f64::INFINITY },
        });
    }
    let intertwining_residual = (&(&theta * h) - &(&h.adjoint() * &theta)).norm_fro();
    let s = hpd_sqrt(&theta)?;
    let s_inv = Lu::factor(&s)?.inverse();
    let hs = &(&s * h) * &s_inv;
    let hermiticity_residual = (&hs - &hs.adjoint()).norm_fro();
    Ok(MetricResult {
        theta,
        s,
        condition,
        min_eigenvalue,
        intertwining_residual,
        hermiticity_residual,
    })
}

/// `[[a, b], [−b, −a]]` with `Ω = √(a² − b²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RpaParams {
    pub a: f64,
    pub b: f64,
}

impl RpaParams {
    pub fn omega(&self) -> Complex64 {
        c(self.a * self.a - self.b * self.b, 0.0).sqrt()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[self.a, self.b], &[-self.b, -self.a]])
    }
}

/// Family in `b` at fixed `a`.
pub fn rpa_block(a: f64) -> Result<MatrixFamily, ModelError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("a = {a} must be positive")));
    }
    let h0 = ComplexMatrix::from_real_rows(&[&[a, 0.0], &[0.0, -a]]);
    let v = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    Ok(MatrixFamily::single(h0, v)?)
}

/// Refines the instability point from a seed off the real axis.
pub fn rpa_ep(a: f64) -> Result<ExceptionalPoint, ModelError> {
    let f = rpa_block(a)?;
    Ok(refine_ep_with(&f, c(0.9 * a, 0.1 * a), &FinderOptions::default())?)
}

/// Generic perturbation of the three-level Jordan block. The zero in the
/// lower-left corner keeps the coalescence centered at `λ = 0` to first order.
pub const EP3_B: [[f64; 3]; 3] = [[0.3, -0.7, 0.2], [0.9, -0.4, 0.5], [0.0, 0.6, 0.25]];

fn jordan3() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]])
}

fn corner() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]])
}

fn ep3_b() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&EP3_B[0], &EP3_B[1], &EP3_B[2]])
}

/// `H(λ) = J₃(0) + λ·e₃e₁ᵀ + ε·B`.
pub fn ep3_family(epsilon: f64) -> Result<MatrixFamily, ModelError> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("ε = {epsilon} must be non-negative")));
    }
    let h0 = &jordan3() + &ep3_b().scale(c(epsilon, 0.0));
    Ok(MatrixFamily::single(h0, corner())?)
}

/// Two-parameter family `(λ, ε) ↦ J₃(0) + λ·e₃e₁ᵀ + ε·B`.
pub fn ep3_two_parameter() -> MatrixFamily {
    MatrixFamily::new(jordan3(), vec![corner(), ep3_b()]).expect("3x3 generators")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SproutingReport {
    pub epsilon: f64,
    /// Unit of the rescaled parameter used for the census.
    pub scale: f64,
    /// Order-2 coalescences, located in `λ`.
    pub points: Vec<ExceptionalPoint>,
    /// Distance between the two points when exactly two were found.
    pub separation: Option<f64>,
}

/// Census of the coalescences split off by `ε > 0`.
///
/// The pair lies `O(ε^{3/2})` apart, so the search runs in `μ = λ/S` with
/// `S = (1.5ε)^{3/2}` on the square `|Re μ|, |Im μ| ≤ 2`.
pub fn ep3_sprouting(epsilon: f64) -> Result<SproutingReport, ModelError> {
    if !(epsilon > 0.0) {
        return Err(ModelError::InvalidParameter("sprouting needs ε > 0".into()));
    }
    let f = ep3_family(epsilon)?;
    let scale = (1.5 * epsilon).powf(1.5);
    let g = f.reparametrized(c(0.0, 0.0), c(scale, 0.0));
    let region = SearchRegion::square(c(0.0, 0.0), 2.0, 0.05);
    let points: Vec<ExceptionalPoint> = census_with(&g, &region, &FinderOptions::default())?
        .into_iter()
        .filter(|e| e.kind == EpKind::Ep2)
        .map(|mut e| {
            e.location = vec![e.lambda() * scale];
            e
        })
        .collect();
    let separation = (points.len() == 2).then(|| (points[0].lambda() - points[1].lambda()).norm());
    Ok(SproutingReport {
        epsilon,
        scale,
        points,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lipkin_two_even_block() {
        let m = lipkin(2).unwrap();
        let h = m.even.at(c(0.3, 0.0));
        let want = ComplexMatrix::from_real_rows(&[&[-1.0, 0.3], &[0.3, 1.0]]);
        assert!((&h - &want).max_abs() < 1e-15);
        assert_eq!(m.odd.dim(), 1);
    }

    #[test]
    fn lipkin_block_dims() {
        let m = lipkin(8).unwrap();
        assert_eq!((m.even.dim(), m.odd.dim()), (5, 4));
        assert!(m.spec.algebra_residual() < 1e-12);
        assert!(lipkin(7).is_err());
    }

    #[test]
    fn pt_spectrum() {
        let f = pt_dimer(1.0).unwrap();
        let e = eigenvalues(&f.at(c(2.0, 0.0))).unwrap();
        assert!((e[0] - c(0.0, -3f64.sqrt())).norm() < 1e-12);
        assert!((e[1] - c(0.0, 3f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn metric_condition_grows() {
        let f = pt_dimer(1.0).unwrap();
        let conds: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&g| quasi_metric(&f.at(c(g, 0.0))).unwrap().condition)
            .collect();
        assert!((conds[0] - 19.0).abs() < 1e-8);
        assert!(conds[1] > 10.0 * conds[0] && conds[2] > 10.0 * conds[1]);
    }

    #[test]
    fn rpa_spectrum() {
        let p = RpaParams { a: 1.0, b: 1.2 };
        let e = eigenvalues(&p.matrix()).unwrap();
        assert!(e.iter().any(|z| (z - c(0.0, 0.44f64.sqrt())).norm() < 1e-12));
        assert!(e.iter().any(|z| (z + c(0.0, 0.44f64.sqrt())).norm() < 1e-12));
    }
}
