//! Coefficients of the rate lemmas and their monotone simplifications.
//!
//! `gamma` is always indexed by `n` from 0, so `gamma[i]` is `γ_i`.
//! Products of `γ` are accumulated as sums of logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{GeimError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    PolyBanach,
    PolyHilbert,
    ExpBanach,
    ExpHilbert,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::PolyBanach, Regime::PolyHilbert, Regime::ExpBanach, Regime::ExpHilbert];

    pub fn is_polynomial(self) -> bool {
        matches!(self, Regime::PolyBanach | Regime::PolyHilbert)
    }

    pub fn is_hilbert(self) -> bool {
        matches!(self, Regime::PolyHilbert | Regime::ExpHilbert)
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::PolyBanach => "poly_banach",
            Regime::PolyHilbert => "poly_hilbert",
            Regime::ExpBanach => "exp_banach",
            Regime::ExpHilbert => "exp_hilbert",
        }
    }
}

/// `n = 4ℓ + k` with `ℓ1 = 2ℓ + ⌊2k/3⌋` and `ℓ2 = 2(ℓ + ⌈k/4⌉)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSplit {
    pub l: usize,
    pub k: usize,
    pub l1: usize,
    pub l2: usize,
}

impl IndexSplit {
    /// First and last index of the `γ` window, `ℓ1 − ⌈k/4⌉ + 1 ..= ℓ1 − ⌈k/4⌉ + ℓ2`.
    pub fn window(&self) -> (usize, usize) {
        let shift = self.l1 - self.k.div_ceil(4);
        (shift + 1, shift + self.l2)
    }
}

pub fn index_split(n: usize) -> Result<IndexSplit> {
    if n == 0 {
        return Err(GeimError::OutOfRange { index: 0, available: 0 });
    }
    let l = n / 4;
    let k = n % 4;
    Ok(IndexSplit { l, k, l1: 2 * l + (2 * k) / 3, l2: 2 * (l + k.div_ceil(4)) })
}

fn need(gamma: &[f64], n: usize) -> Result<()> {
    if n >= gamma.len() {
        return Err(GeimError::OutOfRange { index: n, available: gamma.len().saturating_sub(1) });
    }
    if let Some(i) = gamma[1..=n].iter().position(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(GeimError::Degenerate(format!("gamma_{} must be positive and finite", i + 1)));
    }
    Ok(())
}

fn log_prod(gamma: &[f64], from: usize, to: usize) -> f64 {
    gamma[from..=to].iter().map(|g| g.ln()).sum()
}

/// `β_1 = 2(1 + η⁻¹)`.
pub fn beta_one(eta0: f64) -> f64 {
    2.0 * (1.0 + 1.0 / eta0)
}

/// `β_n` of the rate lemma for `regime`. `eta0` is the step-0 greedy
/// parameter entering `β_1`; `alpha` is only used by polynomial regimes.
pub fn beta_coeff(regime: Regime, gamma: &[f64], eta0: f64, alpha: f64, n: usize) -> Result<f64> {
    Ok(*beta_sequence(regime, gamma, eta0, alpha, n)?.last().expect("n >= 1"))
}

/// `[β_1, …, β_n]` of the rate lemma for `regime`.
pub fn beta_sequence(regime: Regime, gamma: &[f64], eta0: f64, alpha: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(GeimError::OutOfRange { index: 0, available: gamma.len().saturating_sub(1) });
    }
    if !(eta0 > 0.0) {
        return Err(GeimError::Degenerate("eta must be positive".into()));
    }
    need(gamma, n)?;
    let mut beta = vec![f64::NAN, beta_one(eta0)];
    for m in 2..=n {
        let b = if regime.is_polynomial() {
            let s = index_split(m)?;
            let (lo, hi) = s.window();
            let inv_prod = (-log_prod(gamma, lo, hi) / s.l2 as f64).exp();
            let growth = (2.0 * 2f64.sqrt()).powf(alpha);
            let root =
                if regime.is_hilbert() { (2.0 * beta[s.l1]).sqrt() } else { (2.0 * s.l2 as f64 * beta[s.l1]).sqrt() };
            inv_prod * root * growth
        } else {
            let even = 2 * (m / 2);
            let inv_prod = (-log_prod(gamma, 1, even) / even as f64).exp();
            let base = 2f64.sqrt() * inv_prod;
            if regime.is_hilbert() {
                base
            } else {
                base * (m as f64).sqrt()
            }
        };
        beta.push(b);
    }
    beta.remove(0);
    Ok(beta)
}

/// `β̃_n`, the simplified coefficient valid when `γ` is nonincreasing.
pub fn monotone_coeff(regime: Regime, gamma: &[f64], eta0: f64, alpha: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(GeimError::OutOfRange { index: 0, available: gamma.len().saturating_sub(1) });
    }
    need(gamma, n)?;
    if n == 1 {
        return Ok(beta_one(eta0));
    }
    let g = gamma[n];
    Ok(match regime {
        Regime::PolyBanach => 2f64.powf(3.0 * alpha + 1.0) * index_split(n)?.l2 as f64 / (g * g),
        Regime::PolyHilbert => 2f64.powf(3.0 * alpha + 1.0) / (g * g),
        Regime::ExpBanach => (2.0 * n as f64).sqrt() / g,
        Regime::ExpHilbert => 2f64.sqrt() / g,
    })
}

/// `γ_1 ≥ γ_2 ≥ … ≥ γ_n` within the audit slack.
pub fn gamma_nonincreasing(gamma: &[f64], n: usize) -> bool {
    gamma
        .get(1..=n.min(gamma.len().saturating_sub(1)))
        .is_some_and(|g| g.windows(2).all(|w| crate::check::holds(w[1], w[0])))
}

/// Exponential rate after the lemma: `c2 = c1 2^{−2α−1}`.
pub fn c2_rate(c1: f64, alpha: f64) -> f64 {
    c1 * 2f64.powf(-2.0 * alpha - 1.0)
}

/// Constant of the growth lemma: `τ_n ≤ C1 n^{−α+ζ+β}` when
/// `d_n ≤ C0 n^{−α}` and `γ_n⁻¹ ≤ Cζ n^ζ`.
pub fn c1_zeta_constant(c0: f64, alpha: f64, zeta: f64, beta: f64, c_zeta: f64) -> Result<f64> {
    if !(beta > 0.5) {
        return Err(GeimError::InvalidConfig(format!("growth exponent beta must exceed 1/2, got {beta}")));
    }
    if !(zeta > 0.0 && alpha > 0.0 && c0 > 0.0 && c_zeta > 0.0) {
        return Err(GeimError::InvalidConfig("growth constants must be positive".into()));
    }
    let log_first = c0.ln()
        + 2.0 * alpha * alpha / zeta * 2f64.ln()
        + alpha * ((zeta + beta) / (beta - 0.5)).ln()
        + ((zeta + beta) / zeta * c_zeta.ln()).max(0.0);
    let top = 2 * (2.0 * (zeta + beta)).floor() as usize + 1;
    let second = (1..=top).map(|n| (n as f64).powf(alpha - zeta - beta)).fold(f64::NEG_INFINITY, f64::max);
    Ok(log_first.exp().max(second))
}
