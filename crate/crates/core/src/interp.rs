//! The interpolation operator `J_n`: triangular solve, interpolants, and
//! reconstruction from raw measurements.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GeimError, Result};
use crate::space::{DiscreteFunction, Functional, Grid, NormMode};

/// Coefficients `α_j` of an interpolant in the basis `q_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolantCoeffs {
    pub alpha: Vec<f64>,
}

impl InterpolantCoeffs {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }
}

/// Solve `B α = m` by forward substitution. Only the lower triangle of `b`
/// is read.
pub fn solve_coeffs(b: &DMatrix<f64>, m: &[f64]) -> Result<InterpolantCoeffs> {
    if b.nrows() != b.ncols() {
        return Err(GeimError::SizeMismatch { expected: b.nrows(), got: b.ncols() });
    }
    if b.nrows() != m.len() {
        return Err(GeimError::SizeMismatch { expected: b.nrows(), got: m.len() });
    }
    forward_sub(b, m)
}

fn forward_sub(b: &DMatrix<f64>, m: &[f64]) -> Result<InterpolantCoeffs> {
    if let Some(i) = m.iter().position(|v| !v.is_finite()) {
        return Err(GeimError::NonFinite(i));
    }
    let mut alpha = Vec::with_capacity(m.len());
    for (i, &mi) in m.iter().enumerate() {
        let s: f64 = (0..i).map(|j| b[(i, j)] * alpha[j]).sum();
        let d = b[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return Err(GeimError::IllPosed(i + 1));
        }
        alpha.push((mi - s) / d);
    }
    Ok(InterpolantCoeffs { alpha })
}

/// Basis `q_j`, functionals `σ_i` and `B_ij = σ_i(q_j)`: everything needed to
/// evaluate `J_n` for any `n` up to the basis size.
#[derive(Debug, Clone)]
pub struct InterpolationSystem {
    pub mode: NormMode,
    pub basis: Vec<DiscreteFunction>,
    pub functionals: Vec<Functional>,
    pub b: DMatrix<f64>,
}

impl InterpolationSystem {
    /// Assemble a system, computing `B` from the basis and functionals.
    pub fn assemble(mode: NormMode, basis: Vec<DiscreteFunction>, functionals: Vec<Functional>) -> Result<Self> {
        let n = basis.len();
        if functionals.len() != n {
            return Err(GeimError::SizeMismatch { expected: n, got: functionals.len() });
        }
        let mut b = DMatrix::zeros(n, n);
        for (i, s) in functionals.iter().enumerate() {
            for (j, q) in basis.iter().enumerate() {
                b[(i, j)] = s.apply(q)?;
            }
        }
        Self::from_parts(mode, basis, functionals, b)
    }

    /// Wrap precomputed parts after checking their shapes agree.
    pub fn from_parts(
        mode: NormMode,
        basis: Vec<DiscreteFunction>,
        functionals: Vec<Functional>,
        b: DMatrix<f64>,
    ) -> Result<Self> {
        let n = basis.len();
        if functionals.len() != n {
            return Err(GeimError::SizeMismatch { expected: n, got: functionals.len() });
        }
        if b.nrows() != n || b.ncols() != n {
            return Err(GeimError::SizeMismatch { expected: n, got: b.nrows().max(b.ncols()) });
        }
        if let Some(first) = basis.first() {
            let g = first.grid().clone();
            for q in &basis {
                q.check_grid(&g)?;
            }
            for s in &functionals {
                if !(Arc::ptr_eq(s.grid(), &g) || **s.grid() == *g) {
                    return Err(GeimError::GridMismatch);
                }
            }
        }
        Ok(Self { mode, basis, functionals, b })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn grid(&self) -> Option<&Arc<Grid>> {
        self.basis.first().map(|q| q.grid())
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n > self.len() {
            Err(GeimError::OutOfRange { index: n, available: self.len() })
        } else {
            Ok(())
        }
    }

    /// Measurements `σ_i(f)` for `i < n`.
    pub fn measure(&self, f: &DiscreteFunction, n: usize) -> Result<Vec<f64>> {
        self.check_n(n)?;
        self.functionals[..n].iter().map(|s| s.apply(f)).collect()
    }

    /// Coefficients from measurements using the leading `|m|`-block of `B`.
    pub fn coefficients(&self, m: &[f64]) -> Result<InterpolantCoeffs> {
        self.check_n(m.len()).map_err(|_| GeimError::SizeMismatch { expected: self.len(), got: m.len() })?;
        let n = m.len();
        forward_sub(&self.b.view((0, 0), (n, n)).into_owned(), m)
    }

    /// Field `Σ α_j q_j`; the empty combination is the zero function.
    pub fn combine(&self, alpha: &[f64]) -> Result<DiscreteFunction> {
        let grid = match self.grid() {
            Some(g) => g.clone(),
            None => return Err(GeimError::Degenerate("empty interpolation system".into())),
        };
        DiscreteFunction::combination(&grid, alpha, &self.basis)
    }

    /// `J_n[f]`.
    pub fn interpolate(&self, f: &DiscreteFunction, n: usize) -> Result<DiscreteFunction> {
        if n == 0 {
            return Ok(DiscreteFunction::zeros(f.grid().clone()));
        }
        let m = self.measure(f, n)?;
        let c = self.coefficients(&m)?;
        self.combine(&c.alpha)
    }

    /// The interpolant determined by measurements alone.
    pub fn reconstruct(&self, m: &[f64]) -> Result<DiscreteFunction> {
        let c = self.coefficients(m)?;
        self.combine(&c.alpha)
    }

    /// `‖f − J_n[f]‖` in `mode`.
    pub fn interp_error(&self, f: &DiscreteFunction, n: usize, mode: NormMode) -> Result<f64> {
        Ok(f.sub(&self.interpolate(f, n)?)?.norm(mode))
    }

    /// `max_{i<|m|} |σ_i(g) − m_i|`.
    pub fn consistency_residual(&self, g: &DiscreteFunction, m: &[f64]) -> Result<f64> {
        let got = self.measure(g, m.len())?;
        Ok(got.iter().zip(m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// The first `n` basis functions and functionals.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        self.check_n(n)?;
        Ok(Self {
            mode: self.mode,
            basis: self.basis[..n].to_vec(),
            functionals: self.functionals[..n].to_vec(),
            b: self.b.view((0, 0), (n, n)).into_owned(),
        })
    }
}
