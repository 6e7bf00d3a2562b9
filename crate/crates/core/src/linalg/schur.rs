//! Complex Schur decomposition `A = Q T Q*` by Householder reduction to
//! Hessenberg form followed by single-shift QR sweeps.

use num_complex::Complex64;

use super::{c, ComplexMatrix, LinalgError};

/// Unitary `q` and upper-triangular `t` with `a = q t q*`.
#[derive(Clone, Debug)]
pub struct Schur {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
    pub iterations: usize,
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

pub fn schur(a: &ComplexMatrix) -> Result<Schur, LinalgError> {
    a.check_finite()?;
    let n = a.dim();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    hessenberg(&mut h, &mut q);
    let iterations = qr_sweeps(&mut h, &mut q)?;
    // Clean out the strictly lower part left by rounding.
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = c(0.0, 0.0);
        }
    }
    Ok(Schur {
        q,
        t: h,
        iterations,
    })
}

fn hessenberg(h: &mut ComplexMatrix, q: &mut ComplexMatrix) {
    let n = h.dim();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 {
            c(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        v[0] += phase * norm_x;
        let norm_v = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_v == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= norm_v;
        }
        // h <- P h with P = I - 2 v v*
        for j in 0..n {
            let mut dot = c(0.0, 0.0);
            for (off, vi) in v.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + off, j)];
            }
            for (off, vi) in v.iter().enumerate() {
                h[(k + 1 + off, j)] -= 2.0 * vi * dot;
            }
        }
        // h <- h P, q <- q P
        for m in [&mut *h, &mut *q] {
            for i in 0..n {
                let mut dot = c(0.0, 0.0);
                for (off, vi) in v.iter().enumerate() {
                    dot += m[(i, k + 1 + off)] * vi;
                }
                for (off, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + off)] -= 2.0 * dot * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = c(0.0, 0.0);
        }
    }
}

/// Rotation `G = [[ᾱ, β̄], [-β, α]]` mapping `(a, b)` onto `(r, 0)`.
#[derive(Clone, Copy)]
struct Givens {
    alpha: Complex64,
    beta: Complex64,
}

impl Givens {
    fn new(a: Complex64, b: Complex64) -> Self {
        let r = a.norm().hypot(b.norm());
        if r == 0.0 {
            Self {
                alpha: c(1.0, 0.0),
                beta: c(0.0, 0.0),
            }
        } else {
            Self {
                alpha: a / r,
                beta: b / r,
            }
        }
    }

    /// Rows `k`, `k+1` of `m` over columns `cols`.
    fn apply_left(&self, m: &mut ComplexMatrix, k: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let x = m[(k, j)];
            let y = m[(k + 1, j)];
            m[(k, j)] = self.alpha.conj() * x + self.beta.conj() * y;
            m[(k + 1, j)] = -self.beta * x + self.alpha * y;
        }
    }

    /// Columns `k`, `k+1` of `m` over rows `rows`, multiplying by `G*`.
    fn apply_right_adjoint(&self, m: &mut ComplexMatrix, k: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let x = m[(i, k)];
            let y = m[(i, k + 1)];
            m[(i, k)] = x * self.alpha + y * self.beta;
            m[(i, k + 1)] = -x * self.beta.conj() + y * self.alpha.conj();
        }
    }
}

fn qr_sweeps(h: &mut ComplexMatrix, q: &mut ComplexMatrix) -> Result<usize, LinalgError> {
    let n = h.dim();
    if n < 2 {
        return Ok(0);
    }
    let eps = f64::EPSILON;
    let norm = h.norm_fro().max(f64::MIN_POSITIVE);
    let max_total = MAX_SWEEPS_PER_EIGENVALUE * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        // Locate the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if scale == 0.0 {
                scale = norm;
            }
            if sub <= eps * scale {
                h[(lo, lo - 1)] = c(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if lo + 1 == hi {
            standardize_2x2(h, q, lo);
            hi = lo.saturating_sub(1);
            if lo == 0 {
                break;
            }
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if total > max_total {
            return Err(LinalgError::NoConvergence { iterations: total });
        }

        let shift = if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + c(0.75, 0.4) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let g = Givens::new(h[(k, k)], h[(k + 1, k)]);
            g.apply_left(h, k, k..n);
            h[(k + 1, k)] = c(0.0, 0.0);
            rots.push(g);
        }
        for (off, g) in rots.iter().enumerate() {
            let k = lo + off;
            g.apply_right_adjoint(h, k, 0..(k + 2).min(hi + 1));
            g.apply_right_adjoint(q, k, 0..n);
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(total)
}

fn wilkinson_shift(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let root = (half * half + b * cc).sqrt();
    let mean = (a + d) * 0.5;
    let m1 = mean + root;
    let m2 = mean - root;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Triangularizes the 2x2 diagonal block at `(k, k)` directly.
fn standardize_2x2(h: &mut ComplexMatrix, q: &mut ComplexMatrix, k: usize) {
    let n = h.dim();
    let a = h[(k, k)];
    let b = h[(k, k + 1)];
    let cc = h[(k + 1, k)];
    let d = h[(k + 1, k + 1)];
    let half = (a - d) * 0.5;
    let root = (half * half + b * cc).sqrt();
    let mean = (a + d) * 0.5;
    // Eigenvalue farther from the mean direction of `half` keeps cancellation small.
    let mu = if (half + root).norm() >= (half - root).norm() {
        mean + root
    } else {
        mean - root
    };
    let x1 = (b, mu - a);
    let x2 = (mu - d, cc);
    let n1 = x1.0.norm_sqr() + x1.1.norm_sqr();
    let n2 = x2.0.norm_sqr() + x2.1.norm_sqr();
    let (x0, y0) = if n1 >= n2 { x1 } else { x2 };
    if x0.norm() == 0.0 && y0.norm() == 0.0 {
        h[(k + 1, k)] = c(0.0, 0.0);
        return;
    }
    let g = Givens::new(x0, y0);
    g.apply_left(h, k, k..n);
    g.apply_right_adjoint(h, k, 0..k + 2);
    g.apply_right_adjoint(q, k, 0..n);
    h[(k + 1, k)] = c(0.0, 0.0);
}
