//! Greedy co-selection of basis functions and measurement functionals.
//!
//! Step `n` picks the snapshot worst reproduced by `J_n`, then the functional
//! that best sees its residual, and normalizes the residual so the new
//! functional reads exactly 1 on the new basis function. The weak variant
//! restricts the snapshot search to a seeded subset and records the ratio it
//! actually achieved against the full set.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeimError, Result};
use crate::interp::InterpolationSystem;
use crate::space::{DiscreteFunction, FunctionSet, Functional, NormMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SubsetSchedule {
    Full,
    /// A fresh sample of `m` snapshots at every step.
    FixedSize {
        m: usize,
    },
    /// Nested prefixes of one seeded permutation: `initial + step·n` snapshots at step `n`.
    Growing {
        initial: usize,
        step: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub n_max: usize,
    pub mode: NormMode,
    #[serde(default = "default_eta")]
    pub eta_target: f64,
    #[serde(default = "default_schedule")]
    pub subset_schedule: SubsetSchedule,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_eta() -> f64 {
    1.0
}
fn default_schedule() -> SubsetSchedule {
    SubsetSchedule::Full
}
fn default_stop_tol() -> f64 {
    1e-12
}

impl GreedyConfig {
    pub fn strong(n_max: usize, mode: NormMode) -> Self {
        Self { n_max, mode, eta_target: 1.0, subset_schedule: SubsetSchedule::Full, stop_tol: 1e-12, seed: 0 }
    }

    pub fn validate(&self, n_snapshots: usize, n_functionals: usize) -> Result<()> {
        if self.n_max == 0 {
            return Err(GeimError::InvalidConfig("n_max must be positive".into()));
        }
        if self.n_max > n_snapshots.min(n_functionals) {
            return Err(GeimError::InvalidConfig(format!(
                "n_max = {} exceeds min(|F|, |Σ|) = {}",
                self.n_max,
                n_snapshots.min(n_functionals)
            )));
        }
        if !(self.eta_target > 0.0 && self.eta_target <= 1.0) {
            return Err(GeimError::InvalidConfig(format!("eta_target must lie in (0, 1], got {}", self.eta_target)));
        }
        if !(self.stop_tol >= 0.0 && self.stop_tol.is_finite()) {
            return Err(GeimError::InvalidConfig("stop_tol must be a nonnegative number".into()));
        }
        match self.subset_schedule {
            SubsetSchedule::FixedSize { m: 0 } => Err(GeimError::InvalidConfig("subset size must be positive".into())),
            SubsetSchedule::Growing { initial: 0, .. } => {
                Err(GeimError::InvalidConfig("initial subset size must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GreedyResult {
    pub system: InterpolationSystem,
    pub selected_phi: Vec<DiscreteFunction>,
    pub selected_phi_index: Vec<usize>,
    pub selected_sigma_index: Vec<usize>,
    /// `ε_n(φ_n)` of the chosen snapshot; entry 0 is `‖φ_0‖`.
    pub eps_history: Vec<f64>,
    /// `max_{φ∈F} ε_n(φ)` at each step.
    pub max_residual: Vec<f64>,
    /// `ε_n(φ_n) / max_{φ∈F} ε_n(φ)`, measured against the full set.
    pub effective_eta: Vec<f64>,
    pub stopped_early: bool,
    /// Ratio the next selection would achieve after the last step.
    pub trailing_eta: f64,
    /// `max_{φ∈F} ε_N(φ)` after the last step.
    pub trailing_max_residual: f64,
}

impl GreedyResult {
    pub fn len(&self) -> usize {
        self.system.len()
    }

    pub fn is_empty(&self) -> bool {
        self.system.is_empty()
    }

    pub fn basis_q(&self) -> &[DiscreteFunction] {
        &self.system.basis
    }

    pub fn selected_sigma(&self) -> &[Functional] {
        &self.system.functionals
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.system.b
    }

    pub fn mode(&self) -> NormMode {
        self.system.mode
    }

    /// `η_n` for `n = 0..=N`: per-step ratios followed by the trailing ratio.
    pub fn eta_sequence(&self) -> Vec<f64> {
        let mut v = self.effective_eta.clone();
        v.push(self.trailing_eta);
        v
    }
}

/// `ε_n(φ)` for every member of `set` (`n = 0` gives norms).
pub fn residual_scores(system: &InterpolationSystem, set: &FunctionSet, n: usize, mode: NormMode) -> Result<Vec<f64>> {
    set.members().par_iter().map(|f| system.interp_error(f, n, mode)).collect()
}

fn norm_scores(set: &FunctionSet, mode: NormMode) -> Vec<f64> {
    set.members().iter().map(|f| f.norm(mode)).collect()
}

/// Lowest index attaining the maximum.
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Lowest index in `subset` whose score reaches `eta_target` times the subset maximum.
fn weak_select(scores: &[f64], subset: &[usize], eta_target: f64) -> usize {
    let m = subset.iter().map(|&i| scores[i]).fold(f64::NEG_INFINITY, f64::max);
    let threshold = eta_target * m;
    *subset.iter().find(|&&i| scores[i] >= threshold).unwrap_or(&subset[0])
}

fn best_functional(dict: &[Functional], r: &DiscreteFunction) -> Result<(usize, f64)> {
    let vals = dict.par_iter().map(|s| s.apply(r)).collect::<Result<Vec<_>>>()?;
    let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    let (k, _) = argmax(&abs);
    Ok((k, vals[k]))
}

/// `(φ_0 index, σ_0 index, q_0)` with `q_0 = φ_0 / σ_0(φ_0)`.
pub fn select_first(
    set: &FunctionSet,
    dict: &[Functional],
    mode: NormMode,
) -> Result<(usize, usize, DiscreteFunction)> {
    if dict.is_empty() {
        return Err(GeimError::Degenerate("dictionary is empty".into()));
    }
    let norms = norm_scores(set, mode);
    let (i, m) = argmax(&norms);
    if m == 0.0 {
        return Err(GeimError::Degenerate("every snapshot is zero".into()));
    }
    first_from(set, dict, i)
}

fn first_from(set: &FunctionSet, dict: &[Functional], i: usize) -> Result<(usize, usize, DiscreteFunction)> {
    let phi = &set.members()[i];
    let (k, v) = best_functional(dict, phi)?;
    if v == 0.0 {
        return Err(GeimError::Unisolvence { step: 0 });
    }
    Ok((i, k, phi.scaled(1.0 / v)))
}

fn append(system: &mut InterpolationSystem, q: DiscreteFunction, sigma: Functional) -> Result<()> {
    let n = system.len();
    let mut b = DMatrix::zeros(n + 1, n + 1);
    b.view_mut((0, 0), (n, n)).copy_from(&system.b);
    for j in 0..n {
        b[(n, j)] = sigma.apply(&system.basis[j])?;
        b[(j, n)] = system.functionals[j].apply(&q)?;
    }
    b[(n, n)] = sigma.apply(&q)?;
    system.basis.push(q);
    system.functionals.push(sigma);
    system.b = b;
    Ok(())
}

/// One greedy step restricted to `subset`. Returns `false` (and marks the
/// result as stopped) when the full-set residual is below `stop_tol·ε_0`.
pub fn greedy_step(
    state: &mut GreedyResult,
    set: &FunctionSet,
    dict: &[Functional],
    subset: &[usize],
    eta_target: f64,
    stop_tol: f64,
) -> Result<bool> {
    let n = state.len();
    let mode = state.mode();
    let scores = residual_scores(&state.system, set, n, mode)?;
    let (_, full_max) = argmax(&scores);
    let reference = state.max_residual[0];
    if full_max <= stop_tol * reference {
        state.stopped_early = true;
        state.trailing_max_residual = full_max;
        state.trailing_eta = 1.0;
        return Ok(false);
    }
    let i = choose(&scores, subset, eta_target, full_max, stop_tol * reference);
    let phi = &set.members()[i];
    let mut r = phi.sub(&state.system.interpolate(phi, n)?)?;
    // One refinement pass keeps σ_i(q_n) at roundoff level for i < n.
    let correction = state.system.interpolate(&r, n)?;
    r = r.sub(&correction)?;
    let (k, v) = best_functional(dict, &r)?;
    if v.abs() <= 1e-14 * r.norm(mode) || v == 0.0 {
        return Err(GeimError::Unisolvence { step: n });
    }
    append(&mut state.system, r.scaled(1.0 / v), dict[k].clone())?;
    state.selected_phi.push(phi.clone());
    state.selected_phi_index.push(i);
    state.selected_sigma_index.push(k);
    state.eps_history.push(scores[i]);
    state.max_residual.push(full_max);
    state.effective_eta.push(scores[i] / full_max);
    Ok(true)
}

fn choose(scores: &[f64], subset: &[usize], eta_target: f64, full_max: f64, floor: f64) -> usize {
    let sub_max = subset.iter().map(|&i| scores[i]).fold(0.0, f64::max);
    if sub_max <= floor && full_max > floor {
        // The sample is already captured: fall back to the full set.
        argmax(scores).0
    } else {
        weak_select(scores, subset, eta_target)
    }
}

struct Sampler {
    schedule: SubsetSchedule,
    size: usize,
    rng: ChaCha8Rng,
    permutation: Vec<usize>,
}

impl Sampler {
    fn new(schedule: &SubsetSchedule, size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut permutation: Vec<usize> = (0..size).collect();
        if matches!(schedule, SubsetSchedule::Growing { .. }) {
            permutation.shuffle(&mut rng);
        }
        Self { schedule: schedule.clone(), size, rng, permutation }
    }

    fn subset(&mut self, step: usize) -> Vec<usize> {
        let mut v = match self.schedule {
            SubsetSchedule::Full => return (0..self.size).collect(),
            SubsetSchedule::FixedSize { m } if m >= self.size => return (0..self.size).collect(),
            SubsetSchedule::FixedSize { m } => sample(&mut self.rng, self.size, m).into_vec(),
            SubsetSchedule::Growing { initial, step: inc } => {
                let k = initial.saturating_add(inc.saturating_mul(step)).min(self.size);
                self.permutation[..k].to_vec()
            }
        };
        v.sort_unstable();
        v
    }
}

/// Run the greedy loop for up to `cfg.n_max` steps.
pub fn run_geim(set: &FunctionSet, dict: &[Functional], cfg: &GreedyConfig) -> Result<GreedyResult> {
    cfg.validate(set.len(), dict.len())?;
    for s in dict {
        if !(std::sync::Arc::ptr_eq(s.grid(), set.grid()) || **s.grid() == **set.grid()) {
            return Err(GeimError::GridMismatch);
        }
    }
    let mode = cfg.mode;
    let mut sampler = Sampler::new(&cfg.subset_schedule, set.len(), cfg.seed);

    let norms = norm_scores(set, mode);
    let (_, full_max) = argmax(&norms);
    if full_max == 0.0 {
        return Err(GeimError::Degenerate("every snapshot is zero".into()));
    }
    let subset = sampler.subset(0);
    let i0 = choose(&norms, &subset, cfg.eta_target, full_max, 0.0);
    let (i0, k0, q0) = first_from(set, dict, i0)?;
    let system = InterpolationSystem::from_parts(
        mode,
        vec![q0.clone()],
        vec![dict[k0].clone()],
        DMatrix::from_element(1, 1, dict[k0].apply(&q0)?),
    )?;
    let mut state = GreedyResult {
        system,
        selected_phi: vec![set.members()[i0].clone()],
        selected_phi_index: vec![i0],
        selected_sigma_index: vec![k0],
        eps_history: vec![norms[i0]],
        max_residual: vec![full_max],
        effective_eta: vec![norms[i0] / full_max],
        stopped_early: false,
        trailing_eta: 1.0,
        trailing_max_residual: 0.0,
    };

    for step in 1..cfg.n_max {
        let subset = sampler.subset(step);
        if !greedy_step(&mut state, set, dict, &subset, cfg.eta_target, cfg.stop_tol)? {
            return Ok(state);
        }
    }

    // Trailing scan: what the next selection would achieve.
    let n = state.len();
    let scores = residual_scores(&state.system, set, n, mode)?;
    let (_, full_max) = argmax(&scores);
    state.trailing_max_residual = full_max;
    if full_max <= cfg.stop_tol * state.max_residual[0] {
        state.trailing_eta = 1.0;
    } else {
        let subset = sampler.subset(n);
        let i = choose(&scores, &subset, cfg.eta_target, full_max, cfg.stop_tol * state.max_residual[0]);
        state.trailing_eta = scores[i] / full_max;
    }
    Ok(state)
}
