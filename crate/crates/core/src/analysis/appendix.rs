//! Gram–Schmidt coefficient matrix of the selected snapshots and the
//! product inequality for lower-triangular matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analysis::projection::orthonormal_columns;
use crate::check::Check;
use crate::error::{GeimError, Result};
use crate::space::DiscreteFunction;

/// `a_{i,j} = ⟨φ_i, φ_j*⟩` for the orthonormalized snapshots `φ_j*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixMatrices {
    /// Row `i` holds `a_{i,0..=i}`.
    pub rows: Vec<Vec<f64>>,
}

impl AppendixMatrices {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            self.rows[i][j]
        } else {
            0.0
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let k = self.len();
        DMatrix::from_fn(k, k, |i, j| self.a(i, j))
    }

    /// The `K×K` diagonal block starting at row/column `start`.
    pub fn block(&self, start: usize, k: usize) -> Result<DMatrix<f64>> {
        if start + k > self.len() {
            return Err(GeimError::OutOfRange { index: start + k, available: self.len() });
        }
        Ok(DMatrix::from_fn(k, k, |i, j| self.a(start + i, start + j)))
    }
}

/// Weighted-L2 Gram–Schmidt on the selected snapshots (with reorthogonalization).
pub fn appendix_matrix(selected: &[DiscreteFunction]) -> Result<AppendixMatrices> {
    let first = match selected.first() {
        Some(f) => f,
        None => return Ok(AppendixMatrices { rows: vec![] }),
    };
    let grid = first.grid().clone();
    for f in selected {
        f.check_grid(&grid)?;
    }
    let sw = DVector::from_iterator(grid.len(), grid.weights().iter().map(|w| w.sqrt()));
    let a = DMatrix::from_fn(grid.len(), selected.len(), |i, j| sw[i] * selected[j].values()[i]);
    let q = orthonormal_columns(&a, "selected snapshots")?;
    let coeffs = q.tr_mul(&a); // upper triangular: coeffs[j, i] = ⟨φ_i, φ_j*⟩
    let rows = (0..selected.len()).map(|i| (0..=i).map(|j| coeffs[(j, i)]).collect()).collect();
    Ok(AppendixMatrices { rows })
}

/// Diagonal and tail-sum properties of the appendix matrix.
///
/// `tau[n]` and `gamma[n]` are indexed by subspace dimension `n` and must
/// cover `0..len`; `tau[0]` is the largest snapshot norm.
pub fn appendix_checks(a: &AppendixMatrices, tau: &[f64], gamma: &[f64]) -> Vec<Check> {
    let k = a.len();
    let mut out = Vec::new();
    for n in 0..k {
        let idx = n.to_string();
        let diag = a.a(n, n).abs();
        match (tau.get(n), gamma.get(n)) {
            (Some(&t), Some(&g)) => {
                out.push(Check::le("appendix_diag_lower", idx.clone(), g * t, diag));
                out.push(Check::le("appendix_diag_upper", idx.clone(), diag, t));
            }
            _ => out.push(Check::skipped("appendix_diag", idx.clone(), "tau/gamma history too short")),
        }
        if let Some(&t) = tau.get(n) {
            for m in n..k {
                let tail: f64 = (n..=m).map(|j| a.a(m, j).powi(2)).sum();
                out.push(Check::le("appendix_tail_sum", format!("{n},{m}"), tail, t * t));
            }
        }
    }
    out
}

/// Both sides of `Π g_ii² ≤ ((1/m)Σ‖Pg_i‖²)^m ((1/(K−m))Σ‖g_i − Pg_i‖²)^{K−m}`
/// in log form, where `g_i` are the rows of `g` and `P` projects onto the
/// span of the columns of `w_basis`.
pub fn projection_lemma_sides(g: &DMatrix<f64>, w_basis: &DMatrix<f64>) -> Result<(f64, f64)> {
    let k = g.nrows();
    if g.ncols() != k {
        return Err(GeimError::SizeMismatch { expected: k, got: g.ncols() });
    }
    if w_basis.nrows() != k {
        return Err(GeimError::SizeMismatch { expected: k, got: w_basis.nrows() });
    }
    let m = w_basis.ncols();
    if m == 0 || m >= k {
        return Err(GeimError::InvalidConfig(format!("subspace dimension {m} must lie in 1..{k}")));
    }
    for i in 0..k {
        for j in i + 1..k {
            if g[(i, j)].abs() > 1e-12 {
                return Err(GeimError::InvalidConfig("matrix is not lower triangular".into()));
            }
        }
    }
    let q = orthonormal_columns(w_basis, "subspace")?;
    let mut in_sum = 0.0;
    let mut out_sum = 0.0;
    for i in 0..k {
        let row = g.row(i).transpose();
        let p = &q * q.tr_mul(&row);
        in_sum += p.norm_squared();
        out_sum += (&row - &p).norm_squared();
    }
    let lhs: f64 = (0..k).map(|i| 2.0 * g[(i, i)].abs().ln()).sum();
    let rhs = m as f64 * (in_sum / m as f64).ln() + (k - m) as f64 * (out_sum / (k - m) as f64).ln();
    Ok((lhs, rhs))
}

/// Whether the product inequality holds up to a relative slack of `1e-9`.
pub fn projection_lemma_check(g: &DMatrix<f64>, w_basis: &DMatrix<f64>) -> Result<bool> {
    let (lhs, rhs) = projection_lemma_sides(g, w_basis)?;
    Ok(lhs == f64::NEG_INFINITY || lhs <= rhs + 1e-9)
}
