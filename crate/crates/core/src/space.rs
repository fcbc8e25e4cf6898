//! Discretized function spaces on a 1D quadrature grid.
//!
//! Two norms are available on the same data: the quadrature-weighted L2 norm
//! (a Hilbert space) and the discrete max norm. Functionals are stored as
//! densities against the quadrature weights, so `σ(f) = Σ_i g_i w_i f_i`; in
//! the Hilbert setting the density `g` is then exactly the Riesz representer.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeimError, Result};

/// Default relative tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    Hilbert,
    Sup,
}

/// Ordered abscissae with positive quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(GeimError::InvalidGrid(format!("{} points but {} weights", points.len(), weights.len())));
        }
        if points.len() < 2 {
            return Err(GeimError::InvalidGrid("need at least 2 points".into()));
        }
        if let Some(i) = points.iter().chain(&weights).position(|v| !v.is_finite()) {
            return Err(GeimError::NonFinite(i % points.len()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeimError::InvalidGrid("points must be strictly increasing".into()));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(GeimError::InvalidGrid("weights must be positive".into()));
        }
        Ok(Self { points, weights })
    }

    /// Uniform grid on `[a, b]` with composite trapezoid weights.
    pub fn uniform_trapezoid(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 || !(b > a) {
            return Err(GeimError::InvalidGrid(format!("uniform grid needs n >= 2 and a < b (got n={n}, [{a}, {b}])")));
        }
        let h = (b - a) / (n - 1) as f64;
        let points = (0..n).map(|i| if i == n - 1 { b } else { a + h * i as f64 }).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Self::new(points, weights)
    }

    /// Grid with unit weights on `0, 1, ..., n-1`; handy for plain vectors.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i as f64).collect(), vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lower(&self) -> f64 {
        self.points[0]
    }

    pub fn upper(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Index of the grid point closest to `x` (lowest index on ties).
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &p) in self.points.iter().enumerate() {
            let d = (p - x).abs();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A field sampled on a grid.
#[derive(Debug, Clone)]
pub struct DiscreteFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GeimError::SizeMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GeimError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self, mode: NormMode) -> f64 {
        norm(self, mode)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn check_grid(&self, other: &Arc<Grid>) -> Result<()> {
        if same_grid(&self.grid, other) {
            Ok(())
        } else {
            Err(GeimError::GridMismatch)
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        other.check_grid(&self.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        other.check_grid(&self.grid)?;
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
        Ok(())
    }

    /// Linear combination `Σ c_j f_j` on `grid`; extra coefficients are an error.
    pub fn combination(grid: &Arc<Grid>, coeffs: &[f64], funcs: &[Self]) -> Result<Self> {
        if coeffs.len() > funcs.len() {
            return Err(GeimError::SizeMismatch { expected: funcs.len(), got: coeffs.len() });
        }
        let mut out = Self::zeros(grid.clone());
        for (c, f) in coeffs.iter().zip(funcs) {
            out.axpy(*c, f)?;
        }
        Ok(out)
    }
}

pub fn norm(f: &DiscreteFunction, mode: NormMode) -> f64 {
    match mode {
        NormMode::Hilbert => f.values.iter().zip(f.grid.weights()).map(|(v, w)| w * v * v).sum::<f64>().sqrt(),
        NormMode::Sup => f.values.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Weighted L2 inner product.
pub fn inner(f: &DiscreteFunction, g: &DiscreteFunction) -> Result<f64> {
    g.check_grid(&f.grid)?;
    Ok(f.values.iter().zip(&g.values).zip(f.grid.weights()).map(|((a, b), w)| w * a * b).sum())
}

/// A bounded linear functional, stored as a density against the quadrature.
#[derive(Debug, Clone)]
pub struct Functional {
    grid: Arc<Grid>,
    weights: Vec<f64>,
    normalized_for: Option<NormMode>,
}

impl Functional {
    pub fn new(grid: Arc<Grid>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(GeimError::SizeMismatch { expected: grid.len(), got: weights.len() });
        }
        if let Some(i) = weights.iter().position(|v| !v.is_finite()) {
            return Err(GeimError::NonFinite(i));
        }
        Ok(Self { grid, weights, normalized_for: None })
    }

    /// Point evaluation at grid index `k`, with unit dual norm in `mode`.
    pub fn dirac(grid: Arc<Grid>, k: usize, mode: NormMode) -> Result<Self> {
        if k >= grid.len() {
            return Err(GeimError::OutOfRange { index: k, available: grid.len() });
        }
        let mut w = vec![0.0; grid.len()];
        w[k] = 1.0;
        Self::new(grid, w)?.normalize_dual(mode)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn normalized_for(&self) -> Option<NormMode> {
        self.normalized_for
    }

    pub fn apply(&self, f: &DiscreteFunction) -> Result<f64> {
        f.check_grid(&self.grid)?;
        Ok(self.apply_values(f.values()))
    }

    /// `apply` on raw values already known to live on this grid.
    pub(crate) fn apply_values(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(self.grid.weights()).zip(values).map(|((g, w), f)| g * w * f).sum()
    }

    /// Norm in the dual of `mode`: L2 norm of the representer (Hilbert) or
    /// `Σ |g_i| w_i` (dual of the max norm).
    pub fn dual_norm(&self, mode: NormMode) -> f64 {
        let w = self.grid.weights();
        match mode {
            NormMode::Hilbert => self.weights.iter().zip(w).map(|(g, w)| w * g * g).sum::<f64>().sqrt(),
            NormMode::Sup => self.weights.iter().zip(w).map(|(g, w)| w * g.abs()).sum(),
        }
    }

    /// Riesz representer in the weighted L2 space.
    pub fn representer(&self) -> DiscreteFunction {
        DiscreteFunction { grid: self.grid.clone(), values: self.weights.clone() }
    }

    pub fn normalize_dual(&self, mode: NormMode) -> Result<Self> {
        let n = self.dual_norm(mode);
        if n == 0.0 {
            return Err(GeimError::Degenerate("zero functional cannot be normalized".into()));
        }
        // Already within tolerance: keep bits so repeated normalization is a no-op.
        let weights = if (n - 1.0).abs() <= DEFAULT_TOL && self.normalized_for == Some(mode) {
            self.weights.clone()
        } else {
            self.weights.iter().map(|g| g / n).collect()
        };
        Ok(Self { grid: self.grid.clone(), weights, normalized_for: Some(mode) })
    }
}

/// A nonempty collection of functions on a common grid.
#[derive(Debug, Clone)]
pub struct FunctionSet {
    members: Vec<DiscreteFunction>,
    label: String,
}

impl FunctionSet {
    pub fn new(members: Vec<DiscreteFunction>, label: impl Into<String>) -> Result<Self> {
        let first = members.first().ok_or_else(|| GeimError::Degenerate("function set is empty".into()))?;
        let grid = first.grid.clone();
        for m in &members[1..] {
            m.check_grid(&grid)?;
        }
        Ok(Self { members, label: label.into() })
    }

    /// Build from raw value vectors on `grid`.
    pub fn from_values(grid: &Arc<Grid>, rows: Vec<Vec<f64>>, label: &str) -> Result<Self> {
        let members = rows.into_iter().map(|v| DiscreteFunction::new(grid.clone(), v)).collect::<Result<Vec<_>>>()?;
        Self::new(members, label)
    }

    pub fn members(&self) -> &[DiscreteFunction] {
        &self.members
    }

    pub fn get(&self, i: usize) -> Option<&DiscreteFunction> {
        self.members.get(i)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.members[0].grid()
    }

    pub fn max_norm(&self, mode: NormMode) -> f64 {
        self.members.iter().map(|f| f.norm(mode)).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { members: self.members.iter().map(|f| f.scaled(s)).collect(), label: self.label.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(n: usize) -> Arc<Grid> {
        Arc::new(Grid::unit(n).unwrap())
    }

    fn func(g: &Arc<Grid>, v: &[f64]) -> DiscreteFunction {
        DiscreteFunction::new(g.clone(), v.to_vec()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![0.0], vec![1.0]).is_err());
        assert!(Grid::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Grid::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(Grid::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let g = Grid::uniform_trapezoid(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.weights(), &[0.25, 0.5, 0.5, 0.5, 0.25]);
        assert!((g.weights().iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        let g = unit(3);
        assert_eq!(func(&g, &[1.0, 0.0, 0.0]).norm(NormMode::Hilbert), 1.0);
        let g2 = unit(2);
        assert_eq!(func(&g2, &[3.0, -4.0]).norm(NormMode::Sup), 4.0);
        let half = Arc::new(Grid::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap());
        assert_eq!(func(&half, &[1.0, 1.0]).norm(NormMode::Hilbert), 1.0);
        assert_eq!(DiscreteFunction::zeros(g.clone()).norm(NormMode::Sup), 0.0);
    }

    #[test]
    fn inner_examples() {
        let g = unit(2);
        assert_eq!(inner(&func(&g, &[1.0, 0.0]), &func(&g, &[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(inner(&func(&g, &[1.0, 2.0]), &func(&g, &[2.0, 1.0])).unwrap(), 4.0);
        let g3 = unit(3);
        let e1 = func(&g3, &[1.0, 0.0, 0.0]);
        assert_eq!(inner(&e1, &e1).unwrap(), 1.0);
        assert!(matches!(inner(&e1, &func(&g, &[1.0, 0.0])), Err(GeimError::GridMismatch)));
    }

    #[test]
    fn apply_examples() {
        let g = Arc::new(Grid::uniform_trapezoid(0.0, 1.0, 3).unwrap());
        let f = func(&g, &[0.3, -1.5, 2.0]);
        for k in 0..3 {
            let d = Functional::dirac(g.clone(), k, NormMode::Sup).unwrap();
            assert!((d.apply(&f).unwrap() - f.values()[k]).abs() < 1e-15);
            assert!((d.dual_norm(NormMode::Sup) - 1.0).abs() < 1e-15);
        }
        // Riesz self-application.
        let rep = Functional::new(g.clone(), f.values().to_vec()).unwrap();
        let s = rep.normalize_dual(NormMode::Hilbert).unwrap();
        assert!((s.apply(&f).unwrap() - f.norm(NormMode::Hilbert)).abs() < 1e-14);
    }

    #[test]
    fn normalize_examples() {
        let g = unit(2);
        let s = Functional::new(g.clone(), vec![2.0, 0.0]).unwrap();
        assert_eq!(s.normalize_dual(NormMode::Hilbert).unwrap().weights(), &[1.0, 0.0]);
        let s = Functional::new(g.clone(), vec![1.0, 1.0]).unwrap();
        assert_eq!(s.normalize_dual(NormMode::Sup).unwrap().weights(), &[0.5, 0.5]);
        let z = Functional::new(g, vec![0.0, 0.0]).unwrap();
        assert!(matches!(z.normalize_dual(NormMode::Sup), Err(GeimError::Degenerate(_))));
    }

    #[test]
    fn function_set_rejects_mixed_grids() {
        let a = unit(2);
        let b = unit(3);
        let r = FunctionSet::new(vec![func(&a, &[1.0, 0.0]), func(&b, &[1.0, 0.0, 0.0])], "x");
        assert!(matches!(r, Err(GeimError::GridMismatch)));
        assert!(FunctionSet::new(vec![], "empty").is_err());
    }

    fn grid_and_vectors() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (2usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(0.01f64..2.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn cauchy_schwarz((w, a, b) in grid_and_vectors()) {
            let pts = (0..w.len()).map(|i| i as f64).collect();
            let g = Arc::new(Grid::new(pts, w).unwrap());
            let f = func(&g, &a);
            let h = func(&g, &b);
            let lhs = inner(&f, &h).unwrap().abs();
            let rhs = f.norm(NormMode::Hilbert) * h.norm(NormMode::Hilbert);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
            prop_assert!((inner(&f, &f).unwrap() - f.norm(NormMode::Hilbert).powi(2)).abs() <= 1e-10 * (1.0 + rhs));
        }

        #[test]
        fn normalized_functionals_are_contractions((w, a, b) in grid_and_vectors()) {
            prop_assume!(a.iter().any(|v| v.abs() > 1e-3));
            let pts = (0..w.len()).map(|i| i as f64).collect();
            let g = Arc::new(Grid::new(pts, w).unwrap());
            let f = func(&g, &b);
            for mode in [NormMode::Hilbert, NormMode::Sup] {
                let s = Functional::new(g.clone(), a.clone()).unwrap().normalize_dual(mode).unwrap();
                prop_assert!((s.dual_norm(mode) - 1.0).abs() <= 1e-12);
                prop_assert!(s.apply(&f).unwrap().abs() <= f.norm(mode) * (1.0 + 1e-12) + 1e-12);
                let again = s.normalize_dual(mode).unwrap();
                for (x, y) in again.weights().iter().zip(s.weights()) {
                    prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
                }
            }
        }
    }
}
