//! Best approximation from a finite-dimensional subspace.
//!
//! Hilbert mode uses an orthonormal basis in `W^{1/2}`-scaled coordinates
//! with a second Gram–Schmidt pass on the residual. Sup mode solves the
//! discrete Chebyshev problem `min_c max_k |f_k − Σ_j c_j b_jk|` as a linear
//! program; the reported distance is always the residual actually achieved.

use std::sync::Arc;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::error::{GeimError, Result};
use crate::space::{DiscreteFunction, Grid, NormMode};

/// Relative threshold on the diagonal of `R` below which a basis counts as rank-deficient.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Projection {
    pub best: DiscreteFunction,
    pub dist: f64,
}

/// Reusable projector onto `span(basis)`.
#[derive(Debug, Clone)]
pub struct Projector {
    mode: NormMode,
    grid: Arc<Grid>,
    sqrt_w: DVector<f64>,
    /// Orthonormal columns: `W^{1/2}`-scaled (Hilbert) or unit sup norm (Sup).
    cols: DMatrix<f64>,
}

/// Orthonormal basis of the column span of `a`, failing on numerical rank loss.
pub(crate) fn orthonormal_columns(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if a.ncols() == 0 {
        return Ok(DMatrix::zeros(a.nrows(), 0));
    }
    if a.ncols() > a.nrows() {
        return Err(GeimError::RankDeficient(format!("{what}: {} vectors in dimension {}", a.ncols(), a.nrows())));
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let scale = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    for i in 0..r.nrows() {
        if !(r[(i, i)].abs() > RANK_TOL * scale) {
            return Err(GeimError::RankDeficient(format!("{what}: column {i} is dependent")));
        }
    }
    let mut q = qr.q();
    // Second pass restores orthogonality lost in the first.
    let qr2 = q.clone().qr();
    let signs = qr2.r().diagonal().map(|d| d.signum());
    q = qr2.q();
    for (j, s) in signs.iter().enumerate() {
        if *s < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

impl Projector {
    pub fn new(basis: &[DiscreteFunction], grid: &Arc<Grid>, mode: NormMode) -> Result<Self> {
        for b in basis {
            b.check_grid(grid)?;
        }
        let sqrt_w = DVector::from_iterator(grid.len(), grid.weights().iter().map(|w| w.sqrt()));
        let raw = DMatrix::from_fn(grid.len(), basis.len(), |i, j| basis[j].values()[i]);
        let cols = match mode {
            NormMode::Hilbert => {
                let scaled = DMatrix::from_fn(raw.nrows(), raw.ncols(), |i, j| sqrt_w[i] * raw[(i, j)]);
                orthonormal_columns(&scaled, "projection basis")?
            }
            NormMode::Sup => {
                let mut q = orthonormal_columns(&raw, "projection basis")?;
                for mut c in q.column_iter_mut() {
                    let m = c.amax();
                    c /= m;
                }
                q
            }
        };
        Ok(Self { mode, grid: grid.clone(), sqrt_w, cols })
    }

    pub fn dim(&self) -> usize {
        self.cols.ncols()
    }

    pub fn project(&self, f: &DiscreteFunction) -> Result<Projection> {
        f.check_grid(&self.grid)?;
        if self.dim() == 0 {
            return Ok(Projection { best: DiscreteFunction::zeros(self.grid.clone()), dist: f.norm(self.mode) });
        }
        match self.mode {
            NormMode::Hilbert => self.project_hilbert(f),
            NormMode::Sup => self.project_sup(f),
        }
    }

    pub fn dist(&self, f: &DiscreteFunction) -> Result<f64> {
        Ok(self.project(f)?.dist)
    }

    fn project_hilbert(&self, f: &DiscreteFunction) -> Result<Projection> {
        let fs = DVector::from_iterator(f.len(), f.values().iter().zip(self.sqrt_w.iter()).map(|(v, s)| v * s));
        let mut r = fs.clone();
        for _ in 0..2 {
            let c = self.cols.tr_mul(&r);
            r -= &self.cols * c;
        }
        let dist = r.norm();
        let best = (&fs - &r).component_div(&self.sqrt_w);
        Ok(Projection { best: DiscreteFunction::new(self.grid.clone(), best.as_slice().to_vec())?, dist })
    }

    fn project_sup(&self, f: &DiscreteFunction) -> Result<Projection> {
        let n = self.dim();
        let fv = f.values();
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let c: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
        let t = lp.add_var(1.0, (0.0, f64::INFINITY));
        for (k, &fk) in fv.iter().enumerate() {
            let mut row: Vec<_> = c.iter().enumerate().map(|(j, &v)| (v, self.cols[(k, j)])).collect();
            row.push((t, 1.0));
            lp.add_constraint(row.as_slice(), ComparisonOp::Ge, fk);
            row[n] = (t, -1.0);
            lp.add_constraint(row.as_slice(), ComparisonOp::Le, fk);
        }
        let sol = lp
            .solve()
            .map_err(|e| GeimError::LinearProgram(e.to_string()))?
            .into_solution()
            .map_err(|_| GeimError::LinearProgram("solve interrupted".into()))?;
        let coeffs = DVector::from_iterator(n, c.iter().map(|&v| sol.var_value(v)));
        let best = &self.cols * coeffs;
        let fvec = DVector::from_column_slice(fv);
        let lp_dist = (&fvec - &best).amax();
        // The zero approximant is always feasible; never report worse than it.
        let zero_dist = fvec.amax();
        let (best, dist) = if lp_dist <= zero_dist { (best, lp_dist) } else { (DVector::zeros(fv.len()), zero_dist) };
        Ok(Projection { best: DiscreteFunction::new(self.grid.clone(), best.as_slice().to_vec())?, dist })
    }
}

/// One-shot projection of `f` onto `span(basis)`.
pub fn project(f: &DiscreteFunction, basis: &[DiscreteFunction], mode: NormMode) -> Result<Projection> {
    Projector::new(basis, f.grid(), mode)?.project(f)
}
