//! Kolmogorov widths of a finite snapshot set in the weighted L2 norm.
//!
//! Every reported `d_n` is the max residual of an explicit `n`-dimensional
//! subspace, so it is an upper estimate of the true width. Candidates are the
//! truncated SVD basis, the greedy space when supplied, and a minimax
//! refinement that follows `p`-norm surrogates of the max residual on the
//! Grassmannian with increasing `p`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeimError, Result};
use crate::space::{DiscreteFunction, FunctionSet, NormMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WidthOptions {
    pub refine: bool,
    /// Perturbed restarts per `n` in addition to the unperturbed start.
    pub restarts: usize,
    /// Uniformly random starting subspaces per `n`.
    pub random_starts: usize,
    /// Gradient iterations per `p` level.
    pub iters_per_level: usize,
    pub seed: u64,
}

impl Default for WidthOptions {
    fn default() -> Self {
        Self { refine: true, restarts: 1, random_starts: 8, iters_per_level: 40, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Widths {
    /// `d_n` for `n = 0..=n_max`.
    pub d: Vec<f64>,
    /// Max residual of the truncated SVD basis alone, `n = 0..=n_max`.
    pub svd: Vec<f64>,
    /// Singular values of the `W^{1/2}`-scaled snapshot matrix.
    pub singular_values: Vec<f64>,
}

/// Snapshots in coordinates of their own left singular basis.
struct Reduced {
    /// Column `f` holds the coordinates of snapshot `f` (`S Vᵀ`).
    c: DMatrix<f64>,
    /// Left singular vectors in scaled grid coordinates.
    u: DMatrix<f64>,
    sqrt_w: DVector<f64>,
    singular_values: Vec<f64>,
}

impl Reduced {
    fn new(set: &FunctionSet) -> Self {
        let grid = set.grid();
        let sqrt_w = DVector::from_iterator(grid.len(), grid.weights().iter().map(|w| w.sqrt()));
        let a = DMatrix::from_fn(grid.len(), set.len(), |i, j| sqrt_w[i] * set.members()[j].values()[i]);
        let svd = a.svd(true, true);
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let u_all = svd.u.expect("requested U");
        let vt_all = svd.v_t.expect("requested Vᵀ");
        let k = order.len();
        let u = DMatrix::from_fn(u_all.nrows(), k, |i, j| u_all[(i, order[j])]);
        let s: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
        let c = DMatrix::from_fn(k, set.len(), |i, j| s[i] * vt_all[(order[i], j)]);
        Self { c, u, sqrt_w, singular_values: s }
    }

    fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// Squared residuals of every snapshot against orthonormal `y`.
    fn sq_residuals(&self, y: &DMatrix<f64>) -> Vec<f64> {
        let proj = y * (y.tr_mul(&self.c));
        (0..self.c.ncols()).map(|j| (self.c.column(j) - proj.column(j)).norm_squared()).collect()
    }

    fn max_residual(&self, y: &DMatrix<f64>) -> f64 {
        self.sq_residuals(y).into_iter().fold(0.0, f64::max).sqrt()
    }

    /// Reduced coordinates of grid functions (assumed to lie in the snapshot span).
    fn coords(&self, funcs: &[DiscreteFunction]) -> DMatrix<f64> {
        let a = DMatrix::from_fn(self.sqrt_w.len(), funcs.len(), |i, j| self.sqrt_w[i] * funcs[j].values()[i]);
        self.u.tr_mul(&a)
    }
}

fn orthonormalize(a: DMatrix<f64>) -> Option<DMatrix<f64>> {
    if a.ncols() == 0 {
        return Some(a);
    }
    let scale = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let qr = a.qr();
    if qr.r().diagonal().iter().any(|d| !(d.abs() > 1e-12 * scale)) {
        return None;
    }
    Some(qr.q())
}

const P_LEVELS: [f64; 12] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0];
/// Random starts skip the low levels, whose minimiser is the SVD basis.
const RANDOM_FIRST_LEVEL: usize = 2;

fn refine(red: &Reduced, start: DMatrix<f64>, iters: usize, first_level: usize) -> (DMatrix<f64>, f64) {
    let mut y = start;
    let mut best_val = red.max_residual(&y);
    let mut best = y.clone();
    let mut step = f64::NAN;
    for &p in &P_LEVELS[first_level..] {
        for _ in 0..iters {
            let r = red.sq_residuals(&y);
            let m = r.iter().cloned().fold(0.0, f64::max);
            if m <= 0.0 {
                return (y, 0.0);
            }
            let obj = |r: &[f64]| r.iter().map(|v| (v / m).max(0.0).powf(p)).sum::<f64>();
            let f0 = obj(&r);
            // Euclidean gradient of Σ (r_f/m)^p is −2 Σ p (r_f/m)^{p−1}/m · c_f c_fᵀ Y.
            let weights = DVector::from_iterator(r.len(), r.iter().map(|v| p * (v / m).max(0.0).powf(p - 1.0) / m));
            let cy = y.tr_mul(&red.c); // n × M
            let mut g = -2.0 * (&red.c * DMatrix::from_diagonal(&weights)) * cy.transpose();
            let yg = y.tr_mul(&g);
            g -= &y * yg;
            let gn2 = g.norm_squared();
            if gn2 <= 1e-30 {
                break;
            }
            let mut t = if step.is_finite() { 2.0 * step } else { 1.0 / g.amax() };
            let mut accepted = None;
            while t > 1e-14 / g.amax() {
                let cand = match orthonormalize(&y - t * &g) {
                    Some(c) => c,
                    None => break,
                };
                let rc = red.sq_residuals(&cand);
                let f1 = obj(&rc);
                if f1 <= f0 - 1e-4 * t * gn2 {
                    let v = rc.into_iter().fold(0.0, f64::max).sqrt();
                    accepted = Some((cand, v, f1));
                    break;
                }
                t *= 0.5;
            }
            let Some((cand, v, f1)) = accepted else { break };
            step = t;
            if v < best_val {
                best_val = v;
                best = cand.clone();
            }
            y = cand;
            if f0 - f1 <= 1e-10 * f0 {
                break;
            }
        }
    }
    (best, best_val)
}

/// Widths `d_0..=d_{n_max}` of `set` in the weighted L2 norm. `extra` is an
/// optional nested basis (the greedy space) used as an additional candidate.
pub fn compute_widths(
    set: &FunctionSet,
    mode: NormMode,
    n_max: usize,
    extra: Option<&[DiscreteFunction]>,
    opts: &WidthOptions,
) -> Result<Widths> {
    if mode != NormMode::Hilbert {
        return Err(GeimError::UnsupportedMode(mode));
    }
    if let Some(e) = extra {
        for q in e {
            q.check_grid(set.grid())?;
        }
    }
    let red = Reduced::new(set);
    let d0 = set.max_norm(NormMode::Hilbert);
    let extra_coords = extra.map(|e| red.coords(e));
    let scale = red.singular_values.first().cloned().unwrap_or(0.0);

    let per_n: Vec<(f64, f64)> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            if n >= red.dim() {
                return (0.0, 0.0);
            }
            let svd_y = DMatrix::identity(red.dim(), n);
            let svd_val = red.max_residual(&svd_y);
            let mut best = (svd_val, svd_y);
            if let Some(ec) = &extra_coords {
                if ec.ncols() >= n {
                    if let Some(y) = orthonormalize(ec.columns(0, n).into_owned()) {
                        let v = red.max_residual(&y);
                        if v < best.0 {
                            best = (v, y);
                        }
                    }
                }
            }
            if opts.refine && best.0 > 1e-14 * scale {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let base = best.1.clone();
                for attempt in 0..=opts.restarts {
                    let start = if attempt == 0 {
                        base.clone()
                    } else {
                        let noise = DMatrix::from_fn(base.nrows(), n, |_, _| rng.random_range(-0.1..0.1));
                        match orthonormalize(&base + noise) {
                            Some(s) => s,
                            None => continue,
                        }
                    };
                    let (y, v) = refine(&red, start, opts.iters_per_level, 0);
                    if v < best.0 {
                        best = (v, y);
                    }
                }
                for _ in 0..opts.random_starts {
                    let raw = DMatrix::from_fn(red.dim(), n, |_, _| rng.sample::<f64, _>(StandardNormal));
                    let Some(start) = orthonormalize(raw) else { continue };
                    let (y, v) = refine(&red, start, opts.iters_per_level, RANDOM_FIRST_LEVEL);
                    if v < best.0 {
                        best = (v, y);
                    }
                }
            }
            (best.0, svd_val)
        })
        .collect();

    let mut d = vec![d0];
    let mut svd = vec![d0];
    for (v, s) in per_n {
        // A subspace for n−1 extends to one for n, so the estimate may be carried forward.
        let prev = *d.last().unwrap();
        d.push(v.min(prev));
        svd.push(s);
    }
    Ok(Widths { d, svd, singular_values: red.singular_values })
}
