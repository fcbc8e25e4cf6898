//! Quantities the convergence theory compares: best-approximation errors,
//! widths, Lebesgue constants and the Gram–Schmidt coefficient matrix.

pub mod appendix;
pub mod lebesgue;
pub mod projection;
pub mod report;
pub mod widths;

pub use appendix::{
    appendix_checks, appendix_matrix, projection_lemma_check, projection_lemma_sides, AppendixMatrices,
};
pub use lebesgue::{lebesgue_empirical, lebesgue_exact, lebesgue_hilbert, lebesgue_upper, operator_matrix};
pub use projection::{project, Projection, Projector};
pub use report::{analyze, gamma_sequence, AnalysisOptions, AnalysisReport, ErrorBoundWorst};
pub use widths::{compute_widths, WidthOptions, Widths};

use crate::error::Result;
use crate::greedy::GreedyResult;
use crate::space::FunctionSet;

/// `τ_n = max_{f∈F} dist(f, X_n)` for `n = 0..=N`.
pub fn compute_tau(set: &FunctionSet, result: &GreedyResult) -> Result<Vec<f64>> {
    let mode = result.mode();
    let mut best = vec![f64::INFINITY; set.len()];
    (0..=result.len())
        .map(|n| {
            let p = Projector::new(&result.basis_q()[..n], set.grid(), mode)?;
            for (b, f) in best.iter_mut().zip(set.members()) {
                *b = b.min(p.dist(f)?);
            }
            Ok(best.iter().cloned().fold(0.0, f64::max))
        })
        .collect()
}
