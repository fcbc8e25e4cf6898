//! Per-run analysis: every sequence the convergence theory compares.
//!
//! All sequences are indexed by the subspace dimension `n`, starting at 0:
//! `tau[0]` is the largest snapshot norm, `lambda[0] = 0` (the empty
//! interpolant), and `beta[0]` is absent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::appendix::{appendix_matrix, AppendixMatrices};
use crate::analysis::lebesgue::{lebesgue_empirical, lebesgue_exact, lebesgue_hilbert, lebesgue_upper};
use crate::analysis::projection::Projector;
use crate::analysis::widths::{compute_widths, WidthOptions};
use crate::error::Result;
use crate::greedy::GreedyResult;
use crate::space::{FunctionSet, NormMode};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub widths: WidthOptions,
}

/// Snapshot with the least slack in `ε_n(f) ≤ c_n·dist(f, X_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundWorst {
    pub snapshot: usize,
    pub eps: f64,
    pub dist: f64,
    /// `1 + Λ_n` (Sup) or `Λ_n` (Hilbert).
    pub factor: f64,
}

impl ErrorBoundWorst {
    /// `ε / (factor·dist)`; infinite when the bound is zero but the error is not.
    pub fn ratio(&self) -> f64 {
        let bound = self.factor * self.dist;
        if bound > 0.0 {
            self.eps / bound
        } else if self.eps > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub mode: NormMode,
    /// Basis size `N`.
    pub n: usize,
    pub tau: Vec<f64>,
    pub d: Vec<f64>,
    /// Max residual of the truncated SVD basis alone.
    pub d_svd: Vec<f64>,
    /// `d` holds weighted-L2 widths although the run uses another norm.
    pub hilbert_surrogate: bool,
    pub lambda: Vec<f64>,
    pub beta: Vec<Option<f64>>,
    pub lambda_empirical: Vec<f64>,
    pub lebesgue_upper: Vec<f64>,
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `max_{f∈F} ε_n(f)`.
    pub eps_max: Vec<f64>,
    /// `dist(φ_n, X_n)` of each selected snapshot, `n < N`.
    pub selected_dist: Vec<f64>,
    /// Worst snapshot of the interpolation-error bound for `n = 1..=N` (entry 0 unused).
    pub error_bound: Vec<Option<ErrorBoundWorst>>,
    pub appendix: Option<AppendixMatrices>,
    pub notes: Vec<String>,
}

/// `γ_n = η_n / (1 + Λ_n)`.
pub fn gamma_sequence(eta: &[f64], lambda: &[f64]) -> Vec<f64> {
    eta.iter().zip(lambda).map(|(e, l)| e / (1.0 + l)).collect()
}

/// Compute the full report for a greedy run on `set`.
pub fn analyze(result: &GreedyResult, set: &FunctionSet, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let mode = result.mode();
    let system = &result.system;
    let n_basis = system.len();
    let grid = set.grid().clone();
    let mut notes = Vec::new();

    // dist(f, X_n) for every n and snapshot.
    let mut dists: Vec<Vec<f64>> = (0..=n_basis)
        .into_par_iter()
        .map(|n| {
            let proj = Projector::new(&system.basis[..n], &grid, mode)?;
            set.members().iter().map(|f| proj.dist(f)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    // X_{n-1} ⊂ X_n, so a best approximation found at n-1 is admissible at n.
    for n in 1..dists.len() {
        let (head, tail) = dists.split_at_mut(n);
        for (cur, prev) in tail[0].iter_mut().zip(&head[n - 1]) {
            *cur = cur.min(*prev);
        }
    }
    let eps: Vec<Vec<f64>> = (0..=n_basis)
        .into_par_iter()
        .map(|n| set.members().iter().map(|f| system.interp_error(f, n, mode)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let tau: Vec<f64> = dists.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect();
    let eps_max: Vec<f64> = eps.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect();

    let mut lambda = vec![0.0];
    let mut beta = vec![None];
    let mut lambda_empirical = vec![0.0];
    let mut upper = vec![0.0];
    for n in 1..=n_basis {
        match mode {
            NormMode::Hilbert => {
                let (l, b) = lebesgue_hilbert(system, n)?;
                lambda.push(l);
                beta.push(Some(b));
            }
            NormMode::Sup => {
                lambda.push(lebesgue_exact(system, n)?);
                beta.push(None);
            }
        }
        lambda_empirical.push(lebesgue_empirical(system, set, n, mode)?);
        upper.push(lebesgue_upper(system, n, mode)?);
    }

    let eta = result.eta_sequence();
    let gamma = gamma_sequence(&eta, &lambda);

    let error_bound = (0..=n_basis)
        .map(|n| {
            if n == 0 {
                return None;
            }
            let factor = match mode {
                NormMode::Hilbert => lambda[n],
                NormMode::Sup => 1.0 + lambda[n],
            };
            (0..set.len())
                .map(|f| ErrorBoundWorst { snapshot: f, eps: eps[n][f], dist: dists[n][f], factor })
                .max_by(|a, b| a.ratio().total_cmp(&b.ratio()))
        })
        .collect();

    let selected_dist = (0..n_basis).map(|n| dists[n][result.selected_phi_index[n]]).collect();

    let hilbert_surrogate = mode != NormMode::Hilbert;
    let width_set = set.clone();
    let widths = compute_widths(&width_set, NormMode::Hilbert, n_basis, Some(&system.basis), &opts.widths)?;
    if hilbert_surrogate {
        notes.push("widths are weighted-L2 widths of the snapshot set (hilbert_surrogate=true)".into());
    }

    let appendix = if mode == NormMode::Hilbert {
        match appendix_matrix(&result.selected_phi) {
            Ok(a) => Some(a),
            Err(e) => {
                notes.push(format!("appendix matrix unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };

    Ok(AnalysisReport {
        mode,
        n: n_basis,
        tau,
        d: widths.d,
        d_svd: widths.svd,
        hilbert_surrogate,
        lambda,
        beta,
        lambda_empirical,
        lebesgue_upper: upper,
        eta,
        gamma,
        eps_max,
        selected_dist,
        error_bound,
        appendix,
        notes,
    })
}

impl AnalysisReport {
    /// Monotonicity and range spot checks: `(description, holds)`.
    pub fn spot_checks(&self) -> Vec<(String, bool)> {
        let slack = |a: f64, b: f64| crate::check::holds(a, b);
        let mut out = vec![
            ("tau nonincreasing".to_string(), self.tau.windows(2).all(|w| slack(w[1], w[0]))),
            ("d nonincreasing".to_string(), self.d.windows(2).all(|w| slack(w[1], w[0]))),
            ("gamma in (0,1]".to_string(), self.gamma.iter().all(|&g| g > 0.0 && g <= 1.0 + 1e-12)),
        ];
        if !self.hilbert_surrogate {
            out.push(("d <= tau".to_string(), self.d.iter().zip(&self.tau).all(|(d, t)| slack(*d, *t))));
        }
        if self.mode == NormMode::Hilbert {
            out.push(("lambda >= 1".to_string(), self.lambda[1..].iter().all(|&l| l >= 1.0 - 1e-12)));
            out.push((
                "lambda = 1/beta".to_string(),
                self.lambda.iter().zip(&self.beta).all(|(l, b)| b.is_none_or(|b| (l * b - 1.0).abs() <= 1e-12)),
            ));
        }
        out
    }
}
