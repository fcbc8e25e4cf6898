//! Product bounds relating `τ`, `γ` and `d` over an index window, and the
//! single-index corollaries derived from them.

use serde::{Deserialize, Serialize};

use crate::check::Check;
use crate::error::{GeimError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Banach,
    Hilbert,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Banach => "banach",
            Space::Hilbert => "hilbert",
        }
    }
}

fn window_ok(tau: &[f64], gamma: &[f64], d: &[f64], n0: usize, k: usize, m: usize) -> Result<()> {
    if k < 2 || m == 0 || m >= k {
        return Err(GeimError::InvalidConfig(format!("need K >= 2 and 1 <= m < K, got K={k}, m={m}")));
    }
    let top = n0 + k;
    let available = tau.len().min(gamma.len()).saturating_sub(1);
    if top > available {
        return Err(GeimError::OutOfRange { index: top, available });
    }
    if m >= d.len() {
        return Err(GeimError::OutOfRange { index: m, available: d.len().saturating_sub(1) });
    }
    Ok(())
}

fn log_gamma_window(gamma: &[f64], n0: usize, k: usize) -> f64 {
    gamma[n0 + 1..=n0 + k].iter().map(|g| g.ln()).sum()
}

/// Logarithms of both sides of the product bound over `τ_{N+1}, …, τ_{N+K}`.
pub fn main_theorem_sides(
    space: Space,
    tau: &[f64],
    gamma: &[f64],
    d: &[f64],
    n0: usize,
    k: usize,
    m: usize,
) -> Result<(f64, f64)> {
    window_ok(tau, gamma, d, n0, k, m)?;
    let (kf, mf) = (k as f64, m as f64);
    let lhs: f64 = tau[n0 + 1..=n0 + k].iter().map(|t| 2.0 * t.ln()).sum();
    let common = -2.0 * log_gamma_window(gamma, n0, k) + 2.0 * (kf - mf) * d[m].ln();
    let rhs = match space {
        Space::Banach => {
            let sum_sq: f64 = tau[n0 + 1..=n0 + k].iter().map(|t| t * t).sum();
            common + kf * 2f64.ln() + (kf - mf) * kf.ln() + mf * sum_sq.ln()
        }
        Space::Hilbert => {
            common + mf * (kf / mf).ln() + (kf - mf) * (kf / (kf - mf)).ln() + 2.0 * mf * tau[n0 + 1].ln()
        }
    };
    Ok((lhs, rhs))
}

fn label(n0: usize, k: usize, m: usize) -> String {
    format!("N={n0},K={k},m={m}")
}

/// Product bound as a check on `2K`-th roots of both sides.
pub fn check_main_theorem(
    space: Space,
    tau: &[f64],
    gamma: &[f64],
    d: &[f64],
    n0: usize,
    k: usize,
    m: usize,
) -> Result<Check> {
    let (lhs, rhs) = main_theorem_sides(space, tau, gamma, d, n0, k, m)?;
    let root = 2.0 * k as f64;
    Ok(Check::le(format!("product_{}", space.name()), label(n0, k, m), (lhs / root).exp(), (rhs / root).exp()))
}

/// `τ_{N+K} ≤ (Π γ_{N+i})^{-1/K} c τ_{N+1}^{m/K} d_m^{1−m/K}` with `c = √(2K)`
/// (Banach) or `√2` (Hilbert).
pub fn check_window_bound(
    space: Space,
    tau: &[f64],
    gamma: &[f64],
    d: &[f64],
    n0: usize,
    k: usize,
    m: usize,
) -> Result<Check> {
    window_ok(tau, gamma, d, n0, k, m)?;
    let (kf, mf) = (k as f64, m as f64);
    let c = match space {
        Space::Banach => (2.0 * kf).sqrt(),
        Space::Hilbert => 2f64.sqrt(),
    };
    let log_rhs =
        -log_gamma_window(gamma, n0, k) / kf + c.ln() + mf / kf * tau[n0 + 1].ln() + (1.0 - mf / kf) * d[m].ln();
    Ok(Check::le(format!("window_{}", space.name()), label(n0, k, m), tau[n0 + k], log_rhs.exp()))
}

/// Right side of the single-index bound on `τ_n` minimised over `1 ≤ m < n`.
pub fn general_bound(space: Space, tau: &[f64], gamma: &[f64], d: &[f64], n: usize) -> Result<f64> {
    window_ok(tau, gamma, d, 0, n, 1)?;
    let nf = n as f64;
    let log_g = log_gamma_window(gamma, 0, n) / nf;
    let sum_sq: f64 = tau[1..=n].iter().map(|t| t * t).sum();
    let best = (1..n.min(d.len()))
        .map(|m| {
            let mf = m as f64;
            let tail = (nf - mf) / nf * d[m].ln();
            match space {
                Space::Banach => (nf - mf) / (2.0 * nf) * nf.ln() + mf / (2.0 * nf) * sum_sq.ln() + tail,
                Space::Hilbert => tail,
            }
        })
        .fold(f64::INFINITY, f64::min);
    Ok((-log_g + 0.5 * 2f64.ln() + best).exp())
}

/// Bound on `τ_{2ℓ}`: `2(Πγ)^{-1/2ℓ}√(ℓ d_ℓ)` (Banach) or `√2(Πγ)^{-1/2ℓ}√d_ℓ` (Hilbert).
pub fn pair_bound(space: Space, gamma: &[f64], d: &[f64], l: usize) -> Result<f64> {
    let n = 2 * l;
    if l == 0 || n >= gamma.len() || l >= d.len() {
        return Err(GeimError::OutOfRange { index: n, available: gamma.len().saturating_sub(1) });
    }
    let inv = (-log_gamma_window(gamma, 0, n) / n as f64).exp();
    Ok(match space {
        Space::Banach => 2.0 * inv * (l as f64 * d[l]).sqrt(),
        Space::Hilbert => 2f64.sqrt() * inv * d[l].sqrt(),
    })
}

/// Every admissible `(N, K, m)` with `N + K ≤ limit`.
pub fn sweep_indices(limit: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for n0 in 0..limit {
        for k in 2..=limit - n0 {
            for m in 1..k {
                out.push((n0, k, m));
            }
        }
    }
    out
}
