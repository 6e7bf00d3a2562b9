//! Closed-form two-level family
//! `H(λ) = diag(ω₁, ω₂) + λ [[ε₁, δ₁], [δ₂, ε₂]]`.
//!
//! These formulas are the reference every numerical module is checked against.
//! The square root `s = √(δ₁δ₂)` is taken on the principal branch unless a
//! flipped branch is requested; flipping it exchanges the labels 1 and 2.

use num_complex::Complex64;
use thiserror::Error;

use crate::finder::MatrixFamily;
use crate::linalg::{c, ComplexMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwoLevelError {
    #[error("δ₁ = δ₂ = 0: the levels cross without coalescing")]
    CrossingNotEP,
    #[error("exactly one coupling vanishes: non-diagonalizable crossing, not an EP")]
    NonDiagonalizableCrossing,
    #[error("EP {which} lies at infinity (vanishing denominator)")]
    EpAtInfinity { which: usize },
    #[error("ω₁ = ω₂: Jordan transformation is singular")]
    DegenerateFamily,
    #[error("energy {energy} is an eigenvalue of H(λ)")]
    PoleHit { energy: Complex64 },
    #[error("EP index must be 1 or 2, got {0}")]
    InvalidIndex(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelParams {
    pub omega: [Complex64; 2],
    pub epsilon: [Complex64; 2],
    pub delta: [Complex64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Principal,
    Flipped,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Principal => 1.0,
            Branch::Flipped => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpPair {
    pub lambda: [Complex64; 2],
    pub energy: [Complex64; 2],
    pub branch: Branch,
    /// The value of `√(δ₁δ₂)` actually used.
    pub sqrt_delta: Complex64,
}

/// Right and left eigenvectors at the two EPs, normalized with unit second
/// component.
#[derive(Clone, Debug, PartialEq)]
pub struct EpEigenvectors {
    pub right: [[Complex64; 2]; 2],
    pub left: [[Complex64; 2]; 2],
}

impl TwoLevelParams {
    pub fn new(omega: [Complex64; 2], epsilon: [Complex64; 2], delta: [Complex64; 2]) -> Self {
        Self {
            omega,
            epsilon,
            delta,
        }
    }

    /// `ω = (1, 0)`, `ε = 0`, `δ₁ = δ₂ = ½`; EPs at `∓i`.
    pub fn canonical_dimer() -> Self {
        Self::new(
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0); 2],
            [c(0.5, 0.0); 2],
        )
    }

    pub fn h0(&self) -> ComplexMatrix {
        ComplexMatrix::from_diag(&self.omega)
    }

    pub fn v(&self) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(2);
        v[(0, 0)] = self.epsilon[0];
        v[(0, 1)] = self.delta[0];
        v[(1, 0)] = self.delta[1];
        v[(1, 1)] = self.epsilon[1];
        v
    }

    pub fn at(&self, lambda: Complex64) -> ComplexMatrix {
        &self.h0() + &self.v().scale(lambda)
    }

    pub fn family(&self) -> MatrixFamily {
        MatrixFamily::single(self.h0(), self.v()).expect("2x2 family is well formed")
    }

    /// `[H₀, V] ≠ 0`.
    pub fn is_nontrivial(&self) -> bool {
        self.omega[0] != self.omega[1] && (self.delta[0] != c(0.0, 0.0) || self.delta[1] != c(0.0, 0.0))
    }

    /// `ω`, `ε` real and `δ₁ = conj(δ₂)`.
    pub fn is_hermitian(&self) -> bool {
        self.omega.iter().chain(&self.epsilon).all(|z| z.im == 0.0) && self.delta[0] == self.delta[1].conj()
    }

    fn coupling_check(&self) -> Result<Complex64, TwoLevelError> {
        let zero = c(0.0, 0.0);
        match (self.delta[0] == zero, self.delta[1] == zero) {
            (true, true) => Err(TwoLevelError::CrossingNotEP),
            (true, false) | (false, true) => Err(TwoLevelError::NonDiagonalizableCrossing),
            _ => Ok((self.delta[0] * self.delta[1]).sqrt()),
        }
    }
}

/// EP locations and energies on the principal branch.
pub fn ep_locations(p: &TwoLevelParams) -> Result<EpPair, TwoLevelError> {
    ep_locations_with_branch(p, Branch::Principal)
}

pub fn ep_locations_with_branch(p: &TwoLevelParams, branch: Branch) -> Result<EpPair, TwoLevelError> {
    let s = p.coupling_check()? * branch.sign();
    let i = c(0.0, 1.0);
    let [w1, w2] = p.omega;
    let [e1, e2] = p.epsilon;
    let mut lambda = [c(0.0, 0.0); 2];
    let mut energy = [c(0.0, 0.0); 2];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        let den = i * (e1 - e2) + 2.0 * sign * s;
        if den == c(0.0, 0.0) {
            return Err(TwoLevelError::EpAtInfinity { which: k + 1 });
        }
        lambda[k] = -i * (w1 - w2) / den;
        let eden = e1 - e2 - 2.0 * sign * i * s;
        energy[k] = (e1 * w2 - e2 * w1 - sign * i * s * (w1 + w2)) / eden;
    }
    Ok(EpPair {
        lambda,
        energy,
        branch,
        sqrt_delta: s,
    })
}

/// Both eigenvalues of `H(λ)`, larger-root first.
///
/// Uses the factored form `A·√((λ−λ₁)(λ−λ₂))` so that the pair is exactly
/// equal at the EPs; falls back to the direct discriminant when an EP is at
/// infinity or the couplings vanish.
pub fn energies(p: &TwoLevelParams, lambda: Complex64) -> (Complex64, Complex64) {
    let [w1, w2] = p.omega;
    let [e1, e2] = p.epsilon;
    let mean = 0.5 * (w1 + w2 + lambda * (e1 + e2));
    let root = match ep_locations(p) {
        Ok(ep) => {
            let a = ((e1 - e2) * (e1 - e2) + 4.0 * p.delta[0] * p.delta[1]).sqrt();
            a * ((lambda - ep.lambda[0]) * (lambda - ep.lambda[1])).sqrt()
        }
        Err(_) => {
            let d = w1 - w2 + lambda * (e1 - e2);
            (d * d + 4.0 * lambda * lambda * p.delta[0] * p.delta[1]).sqrt()
        }
    };
    (mean + 0.5 * root, mean - 0.5 * root)
}

/// Right eigenvectors `(±iδ₁/s, 1)ᵀ` and left rows `(±iδ₂/s, 1)`.
pub fn ep_eigenvectors(p: &TwoLevelParams) -> Result<EpEigenvectors, TwoLevelError> {
    let s = p.coupling_check()?;
    let i = c(0.0, 1.0);
    let one = c(1.0, 0.0);
    let r1 = i * p.delta[0] / s;
    let l1 = i * p.delta[1] / s;
    Ok(EpEigenvectors {
        right: [[r1, one], [-r1, one]],
        left: [[l1, one], [-l1, one]],
    })
}

/// `S` with `H(λ_which) = S·J₂(E)·S⁻¹`; the second column is the associate
/// vector, `(H − E)ψ_assoc = φ`.
pub fn jordan_at_ep(p: &TwoLevelParams, which: usize) -> Result<(ComplexMatrix, Complex64), TwoLevelError> {
    let sign = match which {
        1 => 1.0,
        2 => -1.0,
        other => return Err(TwoLevelError::InvalidIndex(other)),
    };
    let ep = ep_locations(p)?;
    if p.omega[0] == p.omega[1] {
        return Err(TwoLevelError::DegenerateFamily);
    }
    let s = ep.sqrt_delta * sign;
    let i = c(0.0, 1.0);
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = i * p.delta[0] / s;
    m[(0, 1)] = (2.0 * i * s - p.epsilon[0] + p.epsilon[1]) / ((p.omega[0] - p.omega[1]) * p.delta[1]);
    m[(1, 0)] = c(1.0, 0.0);
    Ok((m, ep.energy[which - 1]))
}

/// `(E − H(λ))⁻¹` by the explicit 2x2 inverse.
pub fn greens_2x2(p: &TwoLevelParams, lambda: Complex64, energy: Complex64) -> Result<ComplexMatrix, TwoLevelError> {
    let h = p.at(lambda);
    let a = energy - h[(0, 0)];
    let b = -h[(0, 1)];
    let cc = -h[(1, 0)];
    let d = energy - h[(1, 1)];
    let det = a * d - b * cc;
    let scale = a.norm().max(b.norm()).max(cc.norm()).max(d.norm()).max(1.0);
    if det.norm() <= f64::EPSILON * scale * scale {
        return Err(TwoLevelError::PoleHit { energy });
    }
    let mut g = ComplexMatrix::zeros(2);
    g[(0, 0)] = d / det;
    g[(0, 1)] = -b / det;
    g[(1, 0)] = -cc / det;
    g[(1, 1)] = a / det;
    Ok(g)
}

/// Second-order pole coefficient `N = H(λ_which) − E_which·I`.
///
/// This branch-free form is used instead of a transcribed closed-form
/// matrix, whose off-diagonal signs depend on branch conventions.
pub fn green_second_order(p: &TwoLevelParams, which: usize) -> Result<ComplexMatrix, TwoLevelError> {
    if which != 1 && which != 2 {
        return Err(TwoLevelError::InvalidIndex(which));
    }
    let ep = ep_locations(p)?;
    let h = p.at(ep.lambda[which - 1]);
    Ok(&h - &ComplexMatrix::scalar(2, ep.energy[which - 1]))
}
