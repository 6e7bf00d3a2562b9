use num_complex::Complex64;

use super::FinderError;
use crate::linalg::ComplexMatrix;

/// Affine family `H(λ⃗) = H₀ + Σ λ_m V_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFamily {
    h0: ComplexMatrix,
    generators: Vec<ComplexMatrix>,
}

impl MatrixFamily {
    /// All matrices must share a dimension. Zero generators are accepted so
    /// that constant families can serve as controls.
    pub fn new(h0: ComplexMatrix, generators: Vec<ComplexMatrix>) -> Result<Self, FinderError> {
        if generators.is_empty() {
            return Err(FinderError::NoGenerators);
        }
        h0.check_finite()?;
        for (k, g) in generators.iter().enumerate() {
            if g.dim() != h0.dim() {
                return Err(FinderError::GeneratorDimension {
                    index: k,
                    expected: h0.dim(),
                    got: g.dim(),
                });
            }
            g.check_finite()?;
        }
        Ok(Self { h0, generators })
    }

    pub fn single(h0: ComplexMatrix, v: ComplexMatrix) -> Result<Self, FinderError> {
        Self::new(h0, vec![v])
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn n_params(&self) -> usize {
        self.generators.len()
    }

    pub fn h0(&self) -> &ComplexMatrix {
        &self.h0
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn is_constant(&self) -> bool {
        self.generators.iter().all(ComplexMatrix::is_zero)
    }

    pub fn evaluate(&self, params: &[Complex64]) -> Result<ComplexMatrix, FinderError> {
        if params.len() != self.generators.len() {
            return Err(FinderError::ParameterCount {
                expected: self.generators.len(),
                got: params.len(),
            });
        }
        let mut h = self.h0.clone();
        for (p, g) in params.iter().zip(&self.generators) {
            if p.re != 0.0 || p.im != 0.0 {
                h = &h + &g.scale(*p);
            }
        }
        Ok(h)
    }

    /// `H₀ + λV₀`; further generators are held at zero.
    pub fn at(&self, lambda: Complex64) -> ComplexMatrix {
        &self.h0 + &self.generators[0].scale(lambda)
    }

    /// One-parameter family `t ↦ H(base + t·direction)`.
    pub fn slice(&self, base: &[Complex64], direction: &[Complex64]) -> Result<Self, FinderError> {
        let h = self.evaluate(base)?;
        if direction.len() != self.generators.len() {
            return Err(FinderError::ParameterCount {
                expected: self.generators.len(),
                got: direction.len(),
            });
        }
        let mut v = ComplexMatrix::zeros(self.dim());
        for (d, g) in direction.iter().zip(&self.generators) {
            v = &v + &g.scale(*d);
        }
        Ok(Self {
            h0: h,
            generators: vec![v],
        })
    }

    /// Same family with the first parameter shifted and scaled:
    /// `μ ↦ H(origin + scale·μ)`. Used to rescale tiny search regions.
    pub fn reparametrized(&self, origin: Complex64, scale: Complex64) -> Self {
        Self {
            h0: self.at(origin),
            generators: vec![self.generators[0].scale(scale)],
        }
    }

    /// Frobenius scale used for relative tolerances at `λ`.
    pub fn scale_at(&self, lambda: Complex64) -> f64 {
        self.at(lambda).norm_fro().max(1.0)
    }

    /// True when `[H₀, V_m] ≠ 0` for some generator.
    pub fn is_noncommuting(&self) -> bool {
        self.generators
            .iter()
            .any(|g| self.h0.commutator(g).max_abs() > 0.0)
    }
}
