//! Transport of eigenpairs around closed loops in the parameter plane.
//!
//! Right and left eigenvectors are carried together with `ψ̃ψ = 1`. At each
//! step the new pair is rescaled by `γ` (right) and `1/γ` (left) with
//! `γ² = (ψ̃_new·ψ_prev)/(ψ̃_prev·ψ_new)`, a time-symmetric discretization of
//! `ψ̃ dψ = 0`. The balanced gauge keeps only the phase of `γ`, so every pair
//! stays balanced (`‖ψ‖ = ‖ψ̃‖`) and end factors are unimodular. The
//! holomorphic gauge keeps all of `γ`; its two-turn factors are exactly `−1`
//! around an EP2 for any analytic family. For complex-symmetric families the
//! two gauges coincide.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::finder::{refine_location, EpKind, ExceptionalPoint, FinderError, FinderOptions, MatrixFamily};
use crate::linalg::{bilinear, c, eig, norm_inf, EigenSystem, LinalgError};

pub const DEFAULT_SAMPLES: usize = 64;
pub const MAX_SAMPLES: usize = 8192;
const AMBIGUITY_RATIO: f64 = 0.9;
const START_EXCLUSION: f64 = 1e-3;
const CYCLE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("invalid level set: {0}")]
    InvalidLevels(String),
    #[error("loop starts {distance:.3e} from a discriminant zero")]
    StartNearEp { distance: f64 },
    #[error("level matching is ambiguous at {samples} samples per turn")]
    RefineSampling { samples: usize },
    #[error("tracking failed at {samples} samples per turn: {reason}")]
    TrackingFailed { samples: usize, reason: String },
    #[error("expected a classified EP2, got order {order} ({kind})")]
    NotEp2 { order: usize, kind: String },
    #[error("{quantity} fit has R² = {r2:.6}")]
    BadFit { quantity: &'static str, r2: f64 },
    #[error(transparent)]
    Finder(#[from] FinderError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Ccw => 1.0,
            Orientation::Cw => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Ccw => Orientation::Cw,
            Orientation::Cw => Orientation::Ccw,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Ccw => "ccw",
            Orientation::Cw => "cw",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Gauge {
    /// Phase-only transport of balanced pairs.
    #[default]
    Balanced,
    /// Full complex rescaling; analytic continuation of `ψ̃ψ = 1`.
    Holomorphic,
}

impl Gauge {
    pub fn as_str(self) -> &'static str {
        match self {
            Gauge::Balanced => "balanced_transport",
            Gauge::Holomorphic => "holomorphic_transport",
        }
    }
}

/// Circle `center + radius·e^{±iθ}` starting at `θ = start_angle`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopPath {
    pub center: Complex64,
    pub radius: f64,
    pub orientation: Orientation,
    /// Initial samples per turn; doubled adaptively.
    pub samples: usize,
    pub start_angle: f64,
}

impl LoopPath {
    pub fn new(center: Complex64, radius: f64, orientation: Orientation) -> Self {
        Self {
            center,
            radius,
            orientation,
            samples: DEFAULT_SAMPLES,
            start_angle: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), MonodromyError> {
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(MonodromyError::InvalidLoop("non-finite center".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(MonodromyError::InvalidLoop(format!("radius {} must be positive", self.radius)));
        }
        if self.samples < 16 || self.samples > MAX_SAMPLES {
            return Err(MonodromyError::InvalidLoop(format!(
                "samples {} outside [16, {MAX_SAMPLES}]",
                self.samples
            )));
        }
        if !self.start_angle.is_finite() {
            return Err(MonodromyError::InvalidLoop("non-finite start angle".into()));
        }
        Ok(())
    }

    /// Point after `turns` (fractional) revolutions.
    pub fn point(&self, turns: f64) -> Complex64 {
        let theta = self.start_angle + self.orientation.sign() * std::f64::consts::TAU * turns;
        self.center + Complex64::from_polar(self.radius, theta)
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn reversed(&self) -> Self {
        Self {
            orientation: self.orientation.reversed(),
            ..*self
        }
    }

    /// Fails unless at most one of `zeros` lies within `2·radius` of the center.
    pub fn check_isolated(&self, zeros: &[Complex64]) -> Result<(), MonodromyError> {
        let near = zeros
            .iter()
            .filter(|z| (**z - self.center).norm() < 2.0 * self.radius)
            .count();
        if near > 1 {
            return Err(MonodromyError::InvalidLoop(format!(
                "{near} discriminant zeros within twice the radius"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackOptions {
    pub gauge: Gauge,
    pub max_samples: usize,
    /// Stabilization threshold for the end factors between refinements.
    pub tol: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            gauge: Gauge::Balanced,
            max_samples: MAX_SAMPLES,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyResult {
    /// Tracked levels, as positions in the sorted spectrum at the start point.
    pub levels: Vec<usize>,
    /// `permutation[k]` is where `levels[k]` ends.
    pub permutation: Vec<usize>,
    /// End vector of `levels[k]` = `end_factors[k]` × start vector of `permutation[k]`.
    pub end_factors: Vec<Complex64>,
    pub samples_used: usize,
    pub gauge: Gauge,
    /// Whether the factors are Richardson-extrapolated.
    pub extrapolated: bool,
}

impl MonodromyResult {
    pub fn image(&self, level: usize) -> Option<(usize, Complex64)> {
        let k = self.levels.iter().position(|&l| l == level)?;
        Some((self.permutation[k], self.end_factors[k]))
    }

    pub fn is_identity(&self) -> bool {
        self.levels == self.permutation
    }

    /// `a ↔ b` exchanged and every other tracked level fixed.
    pub fn is_transposition(&self, a: usize, b: usize) -> bool {
        self.levels.iter().zip(&self.permutation).all(|(&l, &p)| {
            if l == a {
                p == b
            } else if l == b {
                p == a
            } else {
                p == l
            }
        }) && self.levels.contains(&a)
            && self.levels.contains(&b)
    }

    /// Traversal of `self` followed by `next` from the same start point.
    pub fn then(&self, next: &MonodromyResult) -> Option<MonodromyResult> {
        let mut permutation = Vec::with_capacity(self.levels.len());
        let mut end_factors = Vec::with_capacity(self.levels.len());
        for (&p, &fct) in self.permutation.iter().zip(&self.end_factors) {
            let (q, g) = next.image(p)?;
            permutation.push(q);
            end_factors.push(fct * g);
        }
        Some(MonodromyResult {
            levels: self.levels.clone(),
            permutation,
            end_factors,
            samples_used: self.samples_used.max(next.samples_used),
            gauge: self.gauge,
            extrapolated: self.extrapolated || next.extrapolated,
        })
    }
}

#[derive(Clone, Debug)]
struct Pair {
    right: Vec<Complex64>,
    left: Vec<Complex64>,
}

/// `ψ = αu`, `ψ̃ = v/(αs)` with `|α|² = 1/|s|` and the phase chosen so that
/// complex-symmetric matrices give `ψ̃ = ψᵀ`.
fn balanced_pair(sys: &EigenSystem, k: usize) -> Result<Pair, MonodromyError> {
    let u = &sys.right_vectors[k];
    let v = &sys.left_vectors[k];
    let s = bilinear(v, u);
    if s.norm() <= f64::EPSILON {
        return Err(LinalgError::NearDefective {
            index: k,
            overlap: s.norm(),
        }
        .into());
    }
    let vu: Complex64 = v.iter().zip(u).map(|(a, b)| a * b.conj()).sum();
    let beta = if vu.norm() > 0.0 { vu / vu.norm() } else { c(1.0, 0.0) };
    let alpha = (beta / s).sqrt();
    Ok(Pair {
        right: u.iter().map(|x| x * alpha).collect(),
        left: v.iter().map(|x| x / (alpha * s)).collect(),
    })
}

/// Assigns each transported pair to a level of `sys` by the largest
/// `|ψ̃_prev·u_j|`.
fn match_levels(cur: &[Pair], sys: &EigenSystem, samples: usize) -> Result<Vec<usize>, MonodromyError> {
    let mut out = Vec::with_capacity(cur.len());
    for p in cur {
        let mut best = (0usize, -1.0f64);
        let mut second = -1.0f64;
        for (j, u) in sys.right_vectors.iter().enumerate() {
            let o = bilinear(&p.left, u).norm();
            if o > best.1 {
                second = best.1;
                best = (j, o);
            } else if o > second {
                second = o;
            }
        }
        if !(best.1 > 0.0) || second >= AMBIGUITY_RATIO * best.1 || out.contains(&best.0) {
            return Err(MonodromyError::RefineSampling { samples });
        }
        out.push(best.0);
    }
    Ok(out)
}

type TurnEnd = (Vec<usize>, Vec<Complex64>);

/// Transport at a fixed number of samples per turn; one entry per turn.
fn transport(
    f: &MatrixFamily,
    lp: &LoopPath,
    levels: &[usize],
    turns: usize,
    samples: usize,
    gauge: Gauge,
) -> Result<Vec<TurnEnd>, MonodromyError> {
    let sys0 = eig(&f.at(lp.start()))?;
    let start: Vec<Pair> = (0..sys0.len())
        .map(|k| balanced_pair(&sys0, k))
        .collect::<Result<_, _>>()?;
    let mut cur: Vec<Pair> = levels.iter().map(|&k| start[k].clone()).collect();
    let mut ends = Vec::with_capacity(turns);
    for i in 1..=samples * turns {
        let closing = i % samples == 0;
        let owned;
        let sys = if closing {
            &sys0
        } else {
            owned = eig(&f.at(lp.point(i as f64 / samples as f64)))?;
            &owned
        };
        let assigned = match_levels(&cur, sys, samples)?;
        for (t, &j) in assigned.iter().enumerate() {
            let mut p = if closing { start[j].clone() } else { balanced_pair(sys, j)? };
            let a = bilinear(&cur[t].left, &p.right);
            let b = bilinear(&p.left, &cur[t].right);
            if !(a.norm() > 0.0 && b.norm() > 0.0) {
                return Err(MonodromyError::RefineSampling { samples });
            }
            let mut g = (b / a).sqrt();
            if gauge == Gauge::Balanced {
                g /= g.norm();
            }
            if (g * a).re < 0.0 {
                g = -g;
            }
            p.right.iter_mut().for_each(|x| *x *= g);
            p.left.iter_mut().for_each(|x| *x /= g);
            cur[t] = p;
        }
        if closing {
            let factors = assigned
                .iter()
                .zip(&cur)
                .map(|(&j, p)| bilinear(&start[j].left, &p.right))
                .collect();
            ends.push((assigned, factors));
        }
    }
    Ok(ends)
}

fn max_factor_diff(a: &[TurnEnd], b: &[TurnEnd]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.1.iter().zip(&y.1).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

fn same_permutations(a: &[TurnEnd], b: &[TurnEnd]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.0 == y.0)
}

/// Second-order Richardson extrapolation from `N` and `2N` samples.
fn richardson(coarse: &[TurnEnd], fine: &[TurnEnd]) -> Vec<TurnEnd> {
    coarse
        .iter()
        .zip(fine)
        .map(|(x, y)| {
            let f = x.1.iter().zip(&y.1).map(|(p, q)| (4.0 * q - p) / 3.0).collect();
            (y.0.clone(), f)
        })
        .collect()
}

fn check_levels(f: &MatrixFamily, levels: &[usize]) -> Result<(), MonodromyError> {
    if levels.is_empty() {
        return Err(MonodromyError::InvalidLevels("no levels requested".into()));
    }
    for (k, &l) in levels.iter().enumerate() {
        if l >= f.dim() {
            return Err(MonodromyError::InvalidLevels(format!("level {l} out of range for dimension {}", f.dim())));
        }
        if levels[..k].contains(&l) {
            return Err(MonodromyError::InvalidLevels(format!("level {l} repeated")));
        }
    }
    Ok(())
}

/// Fails when a short Newton search from the start point lands within `1e-3`.
fn check_start(f: &MatrixFamily, lp: &LoopPath) -> Result<(), MonodromyError> {
    let start = lp.start();
    let opts = FinderOptions {
        max_iter: 40,
        max_step: Some(START_EXCLUSION),
        ..FinderOptions::default()
    };
    if let Ok(z) = refine_location(f, start, &opts) {
        let distance = (z.lambda - start).norm();
        if distance < START_EXCLUSION {
            return Err(MonodromyError::StartNearEp { distance });
        }
    }
    Ok(())
}

pub fn track_loop(f: &MatrixFamily, lp: &LoopPath, levels: &[usize]) -> Result<MonodromyResult, MonodromyError> {
    track_loop_with(f, lp, levels, &TrackOptions::default())
}

pub fn track_loop_with(
    f: &MatrixFamily,
    lp: &LoopPath,
    levels: &[usize],
    opts: &TrackOptions,
) -> Result<MonodromyResult, MonodromyError> {
    Ok(track_turns(f, lp, levels, 1, opts)?.remove(0))
}

/// Single pass at `lp.samples` samples per turn, without refinement.
pub fn track_loop_fixed(
    f: &MatrixFamily,
    lp: &LoopPath,
    levels: &[usize],
    gauge: Gauge,
) -> Result<MonodromyResult, MonodromyError> {
    lp.validate()?;
    check_levels(f, levels)?;
    if f.n_params() != 1 {
        return Err(FinderError::NotSingleParameter.into());
    }
    let mut ends = transport(f, lp, levels, 1, lp.samples, gauge)?;
    let (permutation, end_factors) = ends.remove(0);
    Ok(MonodromyResult {
        levels: levels.to_vec(),
        permutation,
        end_factors,
        samples_used: lp.samples,
        gauge,
        extrapolated: false,
    })
}

/// Tracks `turns` consecutive revolutions, doubling the sampling until the
/// permutations agree and the factors stabilize. Entry `m` describes the
/// state after `m + 1` turns.
pub fn track_turns(
    f: &MatrixFamily,
    lp: &LoopPath,
    levels: &[usize],
    turns: usize,
    opts: &TrackOptions,
) -> Result<Vec<MonodromyResult>, MonodromyError> {
    lp.validate()?;
    check_levels(f, levels)?;
    if f.n_params() != 1 {
        return Err(FinderError::NotSingleParameter.into());
    }
    if turns == 0 {
        return Err(MonodromyError::InvalidLoop("at least one turn required".into()));
    }
    check_start(f, lp)?;
    let build = |ends: Vec<TurnEnd>, samples: usize, extrapolated: bool| {
        ends.into_iter()
            .map(|(permutation, end_factors)| MonodromyResult {
                levels: levels.to_vec(),
                permutation,
                end_factors,
                samples_used: samples,
                gauge: opts.gauge,
                extrapolated,
            })
            .collect()
    };
    let max = opts.max_samples.min(MAX_SAMPLES).max(lp.samples);
    let mut n = lp.samples;
    let mut prev: Option<Vec<TurnEnd>> = None;
    let mut prev_ex: Option<Vec<TurnEnd>> = None;
    loop {
        match transport(f, lp, levels, turns, n, opts.gauge) {
            Ok(cur) => {
                if let Some(p) = prev.as_ref().filter(|p| same_permutations(p, &cur)) {
                    if max_factor_diff(p, &cur) <= opts.tol {
                        return Ok(build(cur, n, false));
                    }
                    let ex = richardson(p, &cur);
                    if let Some(pe) = prev_ex.as_ref().filter(|pe| same_permutations(pe, &ex)) {
                        if max_factor_diff(pe, &ex) <= opts.tol {
                            return Ok(build(ex, n, true));
                        }
                    }
                    prev_ex = Some(ex);
                } else {
                    prev_ex = None;
                }
                prev = Some(cur);
            }
            Err(MonodromyError::RefineSampling { .. }) => {
                prev = None;
                prev_ex = None;
                if 2 * n > max {
                    return Err(MonodromyError::TrackingFailed {
                        samples: n,
                        reason: "level matching stays ambiguous".into(),
                    });
                }
            }
            Err(e) => return Err(e),
        }
        if 2 * n > max {
            return Err(MonodromyError::TrackingFailed {
                samples: n,
                reason: "end factors did not stabilize".into(),
            });
        }
        n *= 2;
    }
}

/// Tracks several independent loops concurrently.
pub fn track_loops(
    f: &MatrixFamily,
    loops: &[(LoopPath, Vec<usize>)],
    opts: &TrackOptions,
) -> Vec<Result<MonodromyResult, MonodromyError>> {
    loops
        .par_iter()
        .map(|(lp, levels)| track_loop_with(f, lp, levels, opts))
        .collect()
}

/// State of the two coalescing levels after `turns` revolutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TurnRecord {
    pub turns: usize,
    /// Where ψ₁ and ψ₂ land.
    pub images: [usize; 2],
    pub factors: [Complex64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleReport {
    /// Start-point level whose first counter-clockwise factor is `−1`.
    pub psi1: usize,
    pub psi2: usize,
    pub ccw: Vec<TurnRecord>,
    pub cw: Vec<TurnRecord>,
    /// Largest deviation of the eight factors from the expected signs.
    pub max_deviation: f64,
    pub matches: bool,
    pub samples_used: usize,
}

/// Expected factors of (ψ₁, ψ₂) after 1..=4 counter-clockwise turns:
/// `ψ₁ → −ψ₂ → −ψ₁ → ψ₂ → ψ₁`.
pub const CCW_PATTERN: [[f64; 2]; 4] = [[-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [1.0, 1.0]];
/// Clockwise: `ψ₁ → ψ₂ → −ψ₁ → −ψ₂ → ψ₁`.
pub const CW_PATTERN: [[f64; 2]; 4] = [[1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]];

/// Four turns each way around an EP2, compared with the sign sequence of
/// the exchanged pair.
pub fn verify_cycle(f: &MatrixFamily, ep: &ExceptionalPoint, radius: f64) -> Result<CycleReport, MonodromyError> {
    verify_cycle_with(f, ep, radius, &TrackOptions::default())
}

pub fn verify_cycle_with(
    f: &MatrixFamily,
    ep: &ExceptionalPoint,
    radius: f64,
    opts: &TrackOptions,
) -> Result<CycleReport, MonodromyError> {
    if ep.order != 2 || ep.kind != EpKind::Ep2 {
        return Err(MonodromyError::NotEp2 {
            order: ep.order,
            kind: ep.kind.as_str().into(),
        });
    }
    let ccw_loop = LoopPath::new(ep.lambda(), radius, Orientation::Ccw);
    ccw_loop.validate()?;
    let levels = nearest_levels(f, ccw_loop.start(), ep.energy, 2)?;
    let cw_loop = ccw_loop.reversed();
    let (ccw, cw) = rayon::join(
        || track_turns(f, &ccw_loop, &levels, 4, opts),
        || track_turns(f, &cw_loop, &levels, 4, opts),
    );
    let (ccw, cw) = (ccw?, cw?);
    let first = &ccw[0];
    let (psi1, psi2) = if (first.end_factors[0] + 1.0).norm() <= (first.end_factors[1] + 1.0).norm() {
        (levels[0], levels[1])
    } else {
        (levels[1], levels[0])
    };
    let record = |runs: &[MonodromyResult]| -> Vec<TurnRecord> {
        runs.iter()
            .enumerate()
            .map(|(m, r)| {
                let (i1, f1) = r.image(psi1).expect("tracked level");
                let (i2, f2) = r.image(psi2).expect("tracked level");
                TurnRecord {
                    turns: m + 1,
                    images: [i1, i2],
                    factors: [f1, f2],
                }
            })
            .collect()
    };
    let ccw_rec = record(&ccw);
    let cw_rec = record(&cw);
    let mut max_deviation = 0.0f64;
    let mut images_ok = true;
    for (recs, pattern) in [(&ccw_rec, &CCW_PATTERN), (&cw_rec, &CW_PATTERN)] {
        for (r, expect) in recs.iter().zip(pattern) {
            let swapped = r.turns % 2 == 1;
            let want = if swapped { [psi2, psi1] } else { [psi1, psi2] };
            images_ok &= r.images == want;
            for k in 0..2 {
                max_deviation = max_deviation.max((r.factors[k] - expect[k]).norm());
            }
        }
    }
    let samples_used = ccw.iter().chain(&cw).map(|r| r.samples_used).max().unwrap_or(0);
    Ok(CycleReport {
        psi1,
        psi2,
        ccw: ccw_rec,
        cw: cw_rec,
        max_deviation,
        matches: images_ok && max_deviation <= CYCLE_TOL,
        samples_used,
    })
}

/// Positions of the `n` eigenvalues of `H(λ)` nearest `energy`, ascending.
fn nearest_levels(f: &MatrixFamily, lambda: Complex64, energy: Complex64, n: usize) -> Result<Vec<usize>, MonodromyError> {
    let eigs = crate::linalg::eigenvalues(&f.at(lambda))?;
    if eigs.len() < n {
        return Err(MonodromyError::InvalidLevels(format!("family has {} levels", eigs.len())));
    }
    let mut idx: Vec<usize> = (0..eigs.len()).collect();
    idx.sort_by(|&a, &b| (eigs[a] - energy).norm().total_cmp(&(eigs[b] - energy).norm()));
    idx.truncate(n);
    idx.sort_unstable();
    Ok(idx)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub direction: Complex64,
    pub max_distance: f64,
    pub min_distance: f64,
    pub points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            direction: c(1.0, 0.0),
            max_distance: 1e-2,
            min_distance: 1e-6,
            points: 9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    /// Slope of `ln|E₁ − E₂|` against `ln|λ − λ*|`.
    pub gap_exponent: f64,
    /// Slope of `ln‖ψ‖_∞` with `ψ = u/√(ψ̃·u)` for unit `u`, `ψ̃`.
    pub component_exponent: f64,
    pub gap_r2: f64,
    pub component_r2: f64,
    pub distances: Vec<f64>,
}

pub fn exponent_fit(f: &MatrixFamily, ep: &ExceptionalPoint) -> Result<ExponentFit, MonodromyError> {
    exponent_fit_with(f, ep, &FitOptions::default())
}

/// Log-log fits of the gap and of the normalized eigenvector size along
/// `λ* + d·direction` at geometrically spaced `d`.
pub fn exponent_fit_with(
    f: &MatrixFamily,
    ep: &ExceptionalPoint,
    opts: &FitOptions,
) -> Result<ExponentFit, MonodromyError> {
    if ep.order != 2 {
        return Err(MonodromyError::NotEp2 {
            order: ep.order,
            kind: ep.kind.as_str().into(),
        });
    }
    if f.n_params() != 1 {
        return Err(FinderError::NotSingleParameter.into());
    }
    if !(opts.points >= 3 && opts.min_distance > 0.0 && opts.max_distance > opts.min_distance) {
        return Err(MonodromyError::InvalidLoop("fit needs ≥ 3 points on a positive distance range".into()));
    }
    let dir = opts.direction / opts.direction.norm();
    let ratio = (opts.min_distance / opts.max_distance).ln() / (opts.points - 1) as f64;
    let mut xs = Vec::with_capacity(opts.points);
    let mut gaps = Vec::with_capacity(opts.points);
    let mut comps = Vec::with_capacity(opts.points);
    let mut distances = Vec::with_capacity(opts.points);
    for k in 0..opts.points {
        let d = opts.max_distance * (ratio * k as f64).exp();
        let sys = eig(&f.at(ep.lambda() + dir * d))?;
        let mut idx: Vec<usize> = (0..sys.len()).collect();
        idx.sort_by(|&a, &b| {
            (sys.eigenvalues[a] - ep.energy)
                .norm()
                .total_cmp(&(sys.eigenvalues[b] - ep.energy).norm())
        });
        let (a, b) = (idx[0], idx[1]);
        let gap = (sys.eigenvalues[a] - sys.eigenvalues[b]).norm();
        let comp = [a, b]
            .iter()
            .map(|&j| norm_inf(&sys.right_vectors[j]) / sys.overlaps[j].norm().sqrt())
            .fold(0.0, f64::max);
        distances.push(d);
        xs.push(d.ln());
        gaps.push(gap.ln());
        comps.push(comp.ln());
    }
    let (gap_exponent, gap_r2) = linear_fit(&xs, &gaps);
    let (component_exponent, component_r2) = linear_fit(&xs, &comps);
    for (quantity, r2) in [("gap", gap_r2), ("component", component_r2)] {
        if !(r2 >= 0.999) {
            return Err(MonodromyError::BadFit { quantity, r2 });
        }
    }
    Ok(ExponentFit {
        gap_exponent,
        component_exponent,
        gap_r2,
        component_r2,
        distances,
    })
}

/// Least-squares slope and R²; a constant series counts as a perfect fit.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if syy <= 1e-20 * m * (1.0 + my * my) {
        return (slope, 1.0);
    }
    (slope, sxy * sxy / (sxx * syy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finder::refine_ep;
    use crate::twolevel::TwoLevelParams;

    fn dimer() -> MatrixFamily {
        TwoLevelParams::canonical_dimer().family()
    }

    #[test]
    fn single_ep_loop_swaps() {
        let lp = LoopPath::new(c(0.0, -1.0), 0.5, Orientation::Ccw);
        let r = track_loop(&dimer(), &lp, &[0, 1]).unwrap();
        assert!(r.is_transposition(0, 1));
        for fct in &r.end_factors {
            assert!((fct.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_loop_is_trivial() {
        let lp = LoopPath::new(c(2.0, 0.0), 0.5, Orientation::Ccw);
        let r = track_loop(&dimer(), &lp, &[0, 1]).unwrap();
        assert!(r.is_identity());
        for fct in &r.end_factors {
            assert!((fct - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn dimer_cycle_pattern() {
        let f = dimer();
        let ep = refine_ep(&f, c(0.0, -0.9)).unwrap();
        let rep = verify_cycle(&f, &ep, 0.5).unwrap();
        assert!(rep.matches, "{rep:?}");
    }

    #[test]
    fn start_on_ep_is_rejected() {
        let mut lp = LoopPath::new(c(0.5, -1.0), 0.5, Orientation::Ccw);
        lp.start_angle = std::f64::consts::PI;
        assert!(matches!(
            track_loop(&dimer(), &lp, &[0, 1]),
            Err(MonodromyError::StartNearEp { .. })
        ));
    }

    #[test]
    fn dimer_exponents() {
        let f = dimer();
        let ep = refine_ep(&f, c(0.0, -0.9)).unwrap();
        let fit = exponent_fit(&f, &ep).unwrap();
        assert!((fit.gap_exponent - 0.5).abs() < 0.02);
        assert!((fit.component_exponent + 0.25).abs() < 0.02);
    }
}
