//! Locating, refining and classifying exceptional points of affine families.
//!
//! The indicator is the eigenvalue discriminant `∏(E_i − E_j)²`, which is
//! entire in λ for an affine family. Seeds come from a grid scan; each seed
//! is refined by complex Newton on the squared gap of the closest pair,
//! `(E_a − E_b)²`, the factor of the discriminant that vanishes there.

mod census;
mod classify;
mod epn;
mod family;
mod refine;
mod scan;

pub use census::{census, census_with, coalesced_clusters, refine_all};
pub use classify::{classify, classify_with, ApproachSample, Classification};
pub use epn::{find_epn, find_epn_with, EpnOptions};
pub use family::MatrixFamily;
pub use refine::{pair_discriminant, refine_ep, refine_ep_with, refine_location, RefinedZero};
pub use scan::{indicator_grid, scan_grid, GridValues};

use num_complex::Complex64;
use thiserror::Error;

pub use crate::linalg::char_discriminant;
use crate::linalg::{c, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinderError {
    #[error("family needs at least one generator")]
    NoGenerators,
    #[error("generator {index} has dimension {got}, expected {expected}")]
    GeneratorDimension { index: usize, expected: usize, got: usize },
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("operation needs a single-parameter family")]
    NotSingleParameter,
    #[error("invalid search region: {0}")]
    InvalidRegion(String),
    #[error("invalid cluster: {0}")]
    InvalidCluster(String),
    #[error("Newton iteration did not converge after {iterations} steps (last λ = {last})")]
    NoConvergence { iterations: usize, last: Complex64 },
    #[error("cluster of {requested} levels is ambiguous: {found} levels lie within the clustering radius")]
    ClusterAmbiguous { requested: usize, found: usize },
    #[error("requested order {needed} needs {} free parameters, family has {available}", needed - 1)]
    InsufficientParameters { needed: usize, available: usize },
    #[error("order verification failed for EP{expected}: {reason}")]
    OrderMismatch { expected: usize, reason: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How a refined coalescence behaves on approach.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EpKind {
    /// Square-root branch point with self-orthogonal eigenvectors.
    Ep2,
    /// Coalescence of `order ≥ 3` levels with a single Jordan chain.
    EpN,
    /// Degeneracy with a full eigenbasis (diabolic point).
    Semisimple,
    /// Linear crossing at which the matrix is defective.
    NonDiagonalizableCrossing,
    Unclassified,
}

impl EpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EpKind::Ep2 => "ep2",
            EpKind::EpN => "epn",
            EpKind::Semisimple => "semisimple",
            EpKind::NonDiagonalizableCrossing => "nondiagonalizable_crossing",
            EpKind::Unclassified => "unclassified",
        }
    }
}

/// A refined and classified coalescence.
#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalPoint {
    pub location: Vec<Complex64>,
    pub energy: Complex64,
    pub order: usize,
    pub kind: EpKind,
    /// Positions of the coalescing levels in the sorted spectrum at the EP.
    pub level_indices: Vec<usize>,
    /// Smallest `|ψ̃·ψ|` over the approach sequence and its endpoint.
    pub defect_overlap: f64,
    /// Fitted exponent of the gap versus distance.
    pub exponent: f64,
    /// Modulus of the Newton target at the returned location.
    pub residual: f64,
    pub iterations: usize,
}

impl ExceptionalPoint {
    /// First (or only) parameter.
    pub fn lambda(&self) -> Complex64 {
        self.location[0]
    }

    pub fn is_ep2(&self) -> bool {
        self.kind == EpKind::Ep2
    }
}

/// Rectangle `[lo.re, hi.re] × [lo.im, hi.im]` of the λ-plane with a grid step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchRegion {
    pub lo: Complex64,
    pub hi: Complex64,
    pub step: f64,
    /// Target for `|disc|` at a refined point.
    pub tolerance: f64,
    pub dedup_radius: f64,
}

impl SearchRegion {
    pub fn new(lo: Complex64, hi: Complex64, step: f64) -> Self {
        Self {
            lo,
            hi,
            step,
            tolerance: 1e-20,
            dedup_radius: 1e-6,
        }
    }

    /// Square `[-half, half]²` around `center`.
    pub fn square(center: Complex64, half: f64, step: f64) -> Self {
        Self::new(center - c(half, half), center + c(half, half), step)
    }

    pub fn validate(&self) -> Result<(), FinderError> {
        let finite = [self.lo.re, self.lo.im, self.hi.re, self.hi.im, self.step]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(FinderError::InvalidRegion("non-finite bounds or step".into()));
        }
        if !(self.hi.re > self.lo.re && self.hi.im > self.lo.im) {
            return Err(FinderError::InvalidRegion("empty rectangle".into()));
        }
        if self.step <= 0.0 {
            return Err(FinderError::InvalidRegion("step must be positive".into()));
        }
        if self.tolerance <= 0.0 || self.dedup_radius <= 0.0 {
            return Err(FinderError::InvalidRegion("tolerances must be positive".into()));
        }
        let cells = ((self.hi.re - self.lo.re) / self.step) * ((self.hi.im - self.lo.im) / self.step);
        if cells > 1e8 {
            return Err(FinderError::InvalidRegion("grid too fine".into()));
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.lo.re - margin
            && z.re <= self.hi.re + margin
            && z.im >= self.lo.im - margin
            && z.im <= self.hi.im + margin
    }
}

/// Numerical knobs shared by refinement and classification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinderOptions {
    pub max_iter: usize,
    /// Central-difference step; `None` uses `1e-6·(1+|λ|)`.
    pub fd_step: Option<f64>,
    /// Newton stops once `|Δλ| ≤ step_tol·(1+|λ|)`.
    pub step_tol: f64,
    /// Accept a stagnated iterate when `|g| ≤ accept_residual·max(1,‖H‖)²`.
    pub accept_residual: f64,
    /// Largest Newton step; `None` allows `0.5·(1+|λ|)`.
    pub max_step: Option<f64>,
    /// Approach sequence is `λ* + approach_scale·10^{-k}·direction`, `k = 2..=7`.
    pub approach_scale: f64,
    pub approach_direction: Complex64,
    /// Absolute slack, relative to `max(1,‖H‖)`, when growing clusters.
    pub cluster_floor: f64,
}

impl Default for FinderOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            fd_step: None,
            step_tol: 1e-13,
            accept_residual: 1e-8,
            max_step: None,
            approach_scale: 1.0,
            approach_direction: c(1.0, 0.0),
            cluster_floor: 1e-6,
        }
    }
}

/// (Re, Im) order with both parts quantized to `1e-9`, so that rounding noise
/// in a vanishing real part does not decide the order.
pub(crate) fn cmp_complex(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    let q = |x: f64| (x * 1e9).round();
    q(a.re)
        .total_cmp(&q(b.re))
        .then(q(a.im).total_cmp(&q(b.im)))
        .then(a.re.total_cmp(&b.re))
        .then(a.im.total_cmp(&b.im))
}
