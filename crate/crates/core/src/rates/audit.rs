//! Audit of every explicit bound against the sequences of one analysed run.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{appendix_checks, AnalysisReport};
use crate::check::{Check, Status};
use crate::rates::coeffs::{
    beta_one, beta_sequence, c1_zeta_constant, c2_rate, gamma_nonincreasing, monotone_coeff, Regime,
};
use crate::rates::fit::{fit_sequence, DecayFit, DecayKind, ZetaFit};
use crate::rates::theorem::{check_main_theorem, check_window_bound, general_bound, pair_bound, sweep_indices, Space};
use crate::space::NormMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditOptions {
    /// Enumerate every `(N, K, m)` for the product bounds instead of `N = 0` only.
    pub sweep: bool,
    /// Largest `N + K` of a sweep; defaults to the basis size.
    pub sweep_limit: Option<usize>,
    /// Exponent `β` of the growth lemma; must exceed 1/2.
    pub zeta_beta: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { sweep: false, sweep_limit: None, zeta_beta: 1.0 }
    }
}

/// Decay hypotheses estimated from a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFits {
    pub polynomial: Option<DecayFit>,
    pub exponential: Option<DecayFit>,
    pub zeta: Option<ZetaFit>,
    pub notes: Vec<String>,
}

/// Fit the width sequence with both decay kinds and the growth of `1/γ`.
pub fn fit_run(report: &AnalysisReport) -> RunFits {
    let mut notes = Vec::new();
    let mut attempt = |kind: DecayKind| match fit_sequence(&report.d, kind) {
        Ok(f) if f.alpha > 0.0 => Some(f),
        Ok(f) => {
            notes.push(format!("{kind:?} fit has nonpositive exponent {}", f.alpha));
            None
        }
        Err(e) => {
            notes.push(format!("{kind:?} fit unavailable: {e}"));
            None
        }
    };
    let polynomial = attempt(DecayKind::Polynomial);
    let exponential = attempt(DecayKind::Exponential);
    let zeta = match crate::rates::fit::fit_zeta(&report.gamma) {
        Ok(z) => Some(z),
        Err(e) => {
            notes.push(format!("growth fit unavailable: {e}"));
            None
        }
    };
    RunFits { polynomial, exponential, zeta, notes }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

/// Constants derived during the audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConstants {
    /// `η` of step 0.
    pub eta0: f64,
    /// `min_n η_n`, the uniform greedy parameter of the run.
    pub eta_min: f64,
    pub gamma_nonincreasing: bool,
    pub c2: Option<f64>,
    pub c1_zeta: Option<f64>,
    /// Least-squares exponent `p` of `1 + Λ_n ~ n^p`.
    pub lambda_growth: Option<f64>,
    /// The interpolation bound decays when the width exponent exceeds `3p`.
    pub bound_decays: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateAudit {
    pub mode: NormMode,
    pub n: usize,
    pub fits: RunFits,
    pub constants: AuditConstants,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl RateAudit {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.failed())
    }

    /// One line per check.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<34} {:<16} {:>14} {:>14} {:>14}  status", "check", "index", "lhs", "rhs", "margin");
        let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
        for c in &self.checks {
            let status = match &c.status {
                Status::Pass => "pass".to_string(),
                Status::Fail => "FAIL".to_string(),
                Status::Skipped(r) => format!("skipped ({r})"),
            };
            let _ = writeln!(
                s,
                "{:<34} {:<16} {:>14} {:>14} {:>14}  {}",
                c.id,
                c.index,
                num(c.lhs),
                num(c.rhs),
                num(c.margin),
                status
            );
        }
        let _ = writeln!(
            s,
            "passed {} failed {} skipped {}",
            self.summary.passed, self.summary.failed, self.summary.skipped
        );
        s
    }
}

const SURROGATE: &str = "widths are weighted-L2 surrogates in sup mode";

struct Ctx<'a> {
    r: &'a AnalysisReport,
    checks: Vec<Check>,
    widths_valid: bool,
}

impl Ctx<'_> {
    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn skip(&mut self, id: impl Into<String>, reason: impl Into<String>) {
        self.checks.push(Check::skipped(id, "*", reason));
    }

    /// Push `make()` or one skipped record when widths are unusable.
    fn with_widths(&mut self, id: &str, make: impl FnOnce(&mut Self)) {
        if self.widths_valid {
            make(self);
        } else {
            self.skip(id, SURROGATE);
        }
    }
}

fn lemma_shape(fit: &DecayFit, n: usize) -> f64 {
    let nf = n as f64;
    match fit.kind {
        DecayKind::Polynomial => nf.powf(-fit.alpha),
        DecayKind::Exponential => (-c2_rate(fit.c1, fit.alpha) * nf.powf(fit.alpha)).exp(),
    }
}

/// Lemma constant: exponential regimes require `C0 ≥ 1`.
fn lemma_c0(fit: &DecayFit) -> f64 {
    match fit.kind {
        DecayKind::Polynomial => fit.c0,
        DecayKind::Exponential => fit.c0.max(1.0),
    }
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Audit `report` with the decay hypotheses in `fits`.
pub fn audit_run(report: &AnalysisReport, fits: &RunFits, opts: &AuditOptions) -> RateAudit {
    let r = report;
    let n_basis = r.n;
    let mut cx = Ctx { r, checks: Vec::new(), widths_valid: !r.hilbert_surrogate };
    let eta0 = r.eta.first().cloned().unwrap_or(1.0);
    let eta_min = r.eta.iter().cloned().fold(f64::INFINITY, f64::min);
    let monotone = gamma_nonincreasing(&r.gamma, n_basis);
    let spaces: &[Space] = match r.mode {
        NormMode::Hilbert => &[Space::Banach, Space::Hilbert],
        NormMode::Sup => &[Space::Banach],
    };

    basic_checks(&mut cx);
    lebesgue_checks(&mut cx);
    interpolation_checks(&mut cx);

    if let Some(a) = &r.appendix {
        for c in appendix_checks(a, &r.tau, &r.gamma) {
            cx.push(c);
        }
    } else if r.mode == NormMode::Hilbert {
        cx.skip("appendix", "coefficient matrix unavailable");
    }

    cx.with_widths("width_first_step", |cx| {
        if n_basis >= 1 {
            let rhs = beta_one(eta0) * cx.r.d[1];
            cx.push(Check::le("width_first_step", "1", cx.r.tau[1], rhs));
        }
    });

    for &space in spaces {
        let sname = space.name();
        cx.with_widths(&format!("pair_{sname}"), |cx| {
            for l in 1..=n_basis / 2 {
                if let Ok(b) = pair_bound(space, &cx.r.gamma, &cx.r.d, l) {
                    cx.push(Check::le(format!("pair_{sname}"), (2 * l).to_string(), cx.r.tau[2 * l], b));
                }
            }
        });
        cx.with_widths(&format!("general_{sname}"), |cx| {
            for n in 2..=n_basis {
                if let Ok(b) = general_bound(space, &cx.r.tau, &cx.r.gamma, &cx.r.d, n) {
                    cx.push(Check::le(format!("general_{sname}"), n.to_string(), cx.r.tau[n], b));
                }
            }
        });
        let limit = opts.sweep_limit.unwrap_or(n_basis).min(n_basis);
        let triples: Vec<(usize, usize, usize)> = if opts.sweep {
            sweep_indices(limit)
        } else {
            sweep_indices(limit).into_iter().filter(|t| t.0 == 0).collect()
        };
        cx.with_widths(&format!("product_{sname}"), |cx| {
            for &(n0, k, m) in &triples {
                match check_main_theorem(space, &cx.r.tau, &cx.r.gamma, &cx.r.d, n0, k, m) {
                    Ok(c) => cx.push(c),
                    Err(e) => cx.push(Check::skipped(
                        format!("product_{sname}"),
                        format!("N={n0},K={k},m={m}"),
                        e.to_string(),
                    )),
                }
                if let Ok(c) = check_window_bound(space, &cx.r.tau, &cx.r.gamma, &cx.r.d, n0, k, m) {
                    cx.push(c);
                }
            }
        });
    }

    let mut c2 = None;
    for regime in Regime::ALL {
        if regime.is_hilbert() && r.mode != NormMode::Hilbert {
            continue;
        }
        let fit = if regime.is_polynomial() { &fits.polynomial } else { &fits.exponential };
        let id = regime.name();
        let Some(fit) = fit.as_ref().filter(|_| cx.widths_valid) else {
            let reason = if cx.widths_valid { "no decay fit" } else { SURROGATE };
            cx.skip(format!("rate_{id}"), reason);
            continue;
        };
        if !regime.is_polynomial() {
            c2 = Some(c2_rate(fit.c1, fit.alpha));
        }
        rate_checks(&mut cx, regime, fit, eta0, eta_min, monotone);
    }

    let mut c1_zeta = None;
    match (&fits.polynomial, &fits.zeta) {
        (Some(p), Some(z)) if cx.widths_valid => {
            match c1_zeta_constant(p.c0, p.alpha, z.zeta, opts.zeta_beta, z.c_zeta) {
                Ok(c1) => {
                    c1_zeta = Some(c1);
                    let expo = -p.alpha + z.zeta + opts.zeta_beta;
                    for n in 1..=n_basis {
                        let nf = n as f64;
                        cx.push(Check::le("growth_tau", n.to_string(), r.tau[n], c1 * nf.powf(expo)));
                        let rhs = r.eta[n] * z.c_zeta * c1 * nf.powf(expo + z.zeta);
                        cx.push(Check::le("growth_interp", n.to_string(), r.eps_max[n], rhs));
                    }
                }
                Err(e) => cx.skip("growth_tau", e.to_string()),
            }
        }
        _ => {
            let reason = if cx.widths_valid { "needs polynomial and growth fits" } else { SURROGATE };
            cx.skip("growth_tau", reason);
        }
    }

    let lambda_growth = {
        let (x, y): (Vec<f64>, Vec<f64>) = (1..=n_basis).map(|n| ((n as f64).ln(), (1.0 + r.lambda[n]).ln())).unzip();
        least_squares_slope(&x, &y)
    };
    let bound_decays = match (lambda_growth, &fits.polynomial) {
        (Some(p), Some(f)) if cx.widths_valid => Some(f.alpha > 3.0 * p.max(0.0)),
        _ => None,
    };

    let checks = cx.checks;
    let summary = Summary {
        passed: checks.iter().filter(|c| c.passed()).count(),
        failed: checks.iter().filter(|c| c.failed()).count(),
        skipped: checks.iter().filter(|c| matches!(c.status, Status::Skipped(_))).count(),
    };
    RateAudit {
        mode: r.mode,
        n: n_basis,
        fits: fits.clone(),
        constants: AuditConstants {
            eta0,
            eta_min,
            gamma_nonincreasing: monotone,
            c2,
            c1_zeta,
            lambda_growth,
            bound_decays,
        },
        checks,
        summary,
    }
}

fn basic_checks(cx: &mut Ctx) {
    let r = cx.r;
    cx.push(Check::le("tau_bounded", "0", r.tau[0], 1.0));
    for n in 1..r.tau.len() {
        cx.push(Check::le("tau_nonincreasing", n.to_string(), r.tau[n], r.tau[n - 1]));
    }
    for n in 0..r.n {
        cx.push(Check::le("weak_greedy", n.to_string(), r.gamma[n] * r.tau[n], r.selected_dist[n]));
    }
    cx.with_widths("width_le_tau", |cx| {
        for n in 0..cx.r.d.len().min(cx.r.tau.len()) {
            cx.push(Check::le("width_le_tau", n.to_string(), cx.r.d[n], cx.r.tau[n]));
        }
        for n in 1..cx.r.d.len() {
            cx.push(Check::le("width_nonincreasing", n.to_string(), cx.r.d[n], cx.r.d[n - 1]));
        }
    });
}

fn lebesgue_checks(cx: &mut Ctx) {
    let r = cx.r;
    for n in 1..=r.n {
        cx.push(Check::le("lebesgue_empirical", n.to_string(), r.lambda_empirical[n], r.lambda[n]));
        cx.push(Check::le("lebesgue_upper", n.to_string(), r.lambda[n], r.lebesgue_upper[n]));
    }
}

fn interpolation_checks(cx: &mut Ctx) {
    let r = cx.r;
    for n in 1..=r.n {
        cx.push(Check::le("interp_banach", n.to_string(), r.eps_max[n], (1.0 + r.lambda[n]) * r.tau[n]));
        if r.mode == NormMode::Hilbert {
            cx.push(Check::le("interp_hilbert", n.to_string(), r.eps_max[n], r.lambda[n] * r.tau[n]));
        }
        if let Some(Some(w)) = r.error_bound.get(n) {
            cx.push(Check::le("interp_snapshot", format!("{n}/f{}", w.snapshot), w.eps, w.factor * w.dist));
        }
    }
}

fn rate_checks(cx: &mut Ctx, regime: Regime, fit: &DecayFit, eta0: f64, eta_min: f64, monotone: bool) {
    let r = cx.r;
    let id = regime.name();
    let c0 = lemma_c0(fit);
    let n_basis = r.n;
    if n_basis == 0 {
        return;
    }
    let betas = match beta_sequence(regime, &r.gamma, eta0, fit.alpha, n_basis) {
        Ok(b) => b,
        Err(e) => {
            cx.skip(format!("rate_{id}"), e.to_string());
            return;
        }
    };
    for n in 1..=n_basis {
        let bound = c0 * betas[n - 1] * lemma_shape(fit, n);
        cx.push(Check::le(format!("rate_{id}"), n.to_string(), r.tau[n], bound));
        cx.push(Check::le(format!("interp_rate_{id}"), n.to_string(), r.eps_max[n], (1.0 + r.lambda[n]) * bound));
    }
    if !monotone {
        cx.skip(format!("monotone_{id}"), "gamma is not nonincreasing");
        return;
    }
    // The interpolation corollary replaces γ_n by η/(1+Λ_n) with the uniform η.
    let gamma_uniform: Vec<f64> = r.lambda.iter().map(|l| eta_min / (1.0 + l)).collect();
    for n in 1..=n_basis {
        let Ok(tilde) = monotone_coeff(regime, &r.gamma, eta0, fit.alpha, n) else { continue };
        cx.push(Check::le(format!("monotone_dominates_{id}"), n.to_string(), betas[n - 1], tilde));
        let shape = lemma_shape(fit, n);
        cx.push(Check::le(format!("monotone_{id}"), n.to_string(), r.tau[n], c0 * tilde * shape));
        if let Ok(t) = monotone_coeff(regime, &gamma_uniform, eta0, fit.alpha, n) {
            let rhs = (1.0 + r.lambda[n]) * c0 * t * shape;
            cx.push(Check::le(format!("interp_monotone_{id}"), n.to_string(), r.eps_max[n], rhs));
        }
    }
}
