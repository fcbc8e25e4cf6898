//! Decay-rate fits with envelope constants.
//!
//! A fit returns the least-squares shape and then lifts the constant so the
//! fitted curve dominates every data point, which is what the rate lemmas
//! take as hypothesis.

use serde::{Deserialize, Serialize};

use crate::error::{GeimError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    /// `C0 n^{-α}`.
    Polynomial,
    /// `C0 exp(-c1 n^α)`.
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub kind: DecayKind,
    /// Envelope constant: `value_n ≤ c0·shape(n)` for every fitted point.
    pub c0: f64,
    pub alpha: f64,
    /// Exponential rate; zero for polynomial fits.
    pub c1: f64,
    /// Least-squares constant before lifting to the envelope.
    pub c_ls: f64,
    /// Coefficient of determination of the log-space fit.
    pub r2: f64,
}

impl DecayFit {
    pub fn shape(&self, n: f64) -> f64 {
        match self.kind {
            DecayKind::Polynomial => n.powf(-self.alpha),
            DecayKind::Exponential => (-self.c1 * n.powf(self.alpha)).exp(),
        }
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.c0 * self.shape(n)
    }
}

/// Minimum number of points a fit accepts.
pub const MIN_POINTS: usize = 4;
/// Exponent search range of exponential fits.
pub const EXP_ALPHA_RANGE: (f64, f64) = (0.25, 2.0);

struct Line {
    intercept: f64,
    slope: f64,
    sse: f64,
    r2: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Line { intercept, slope, sse, r2 }
}

fn validate(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < MIN_POINTS {
        return Err(GeimError::Degenerate(format!(
            "a decay fit needs at least {MIN_POINTS} points, got {}",
            points.len()
        )));
    }
    for (i, &(n, v)) in points.iter().enumerate() {
        if !(n.is_finite() && v.is_finite()) {
            return Err(GeimError::NonFinite(i));
        }
        if n <= 0.0 || v <= 0.0 {
            return Err(GeimError::Degenerate(format!("decay fits need positive data, got ({n}, {v})")));
        }
    }
    Ok(())
}

/// Fit `points = [(n, value)]` with the given decay kind.
pub fn fit_decay(points: &[(f64, f64)], kind: DecayKind) -> Result<DecayFit> {
    validate(points)?;
    let logv: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    match kind {
        DecayKind::Polynomial => {
            let logn: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
            let line = least_squares(&logn, &logv);
            let alpha = -line.slope;
            let log_c0 = points.iter().map(|&(n, v)| v.ln() + alpha * n.ln()).fold(f64::NEG_INFINITY, f64::max);
            Ok(DecayFit { kind, c0: log_c0.exp(), alpha, c1: 0.0, c_ls: line.intercept.exp(), r2: line.r2 })
        }
        DecayKind::Exponential => {
            let line_at = |alpha: f64| {
                let x: Vec<f64> = points.iter().map(|p| p.0.powf(alpha)).collect();
                least_squares(&x, &logv)
            };
            let (lo, hi) = EXP_ALPHA_RANGE;
            let steps = 70;
            let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
            let best =
                grid.iter().cloned().min_by(|a, b| line_at(*a).sse.total_cmp(&line_at(*b).sse)).expect("nonempty grid");
            let h = (hi - lo) / steps as f64;
            let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            let mut c = b - phi * (b - a);
            let mut d = a + phi * (b - a);
            let (mut fc, mut fd) = (line_at(c).sse, line_at(d).sse);
            for _ in 0..100 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - phi * (b - a);
                    fc = line_at(c).sse;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + phi * (b - a);
                    fd = line_at(d).sse;
                }
                if b - a < 1e-12 {
                    break;
                }
            }
            let alpha = 0.5 * (a + b);
            let line = line_at(alpha);
            let c1 = -line.slope;
            if !(c1 > 0.0) {
                return Err(GeimError::Degenerate("data does not decay exponentially".into()));
            }
            let log_c0 = points.iter().map(|&(n, v)| v.ln() + c1 * n.powf(alpha)).fold(f64::NEG_INFINITY, f64::max);
            Ok(DecayFit { kind, c0: log_c0.exp(), alpha, c1, c_ls: line.intercept.exp(), r2: line.r2 })
        }
    }
}

/// Fit `seq[n]` for `n ≥ 1`, ignoring exact zeros (captured snapshots).
pub fn fit_sequence(seq: &[f64], kind: DecayKind) -> Result<DecayFit> {
    let points: Vec<(f64, f64)> =
        seq.iter().enumerate().skip(1).filter(|(_, v)| **v > 0.0).map(|(n, v)| (n as f64, *v)).collect();
    fit_decay(&points, kind)
}

/// `γ_n^{-1} ≤ c_zeta n^ζ` for the growth of the inverse stability factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaFit {
    pub zeta: f64,
    pub c_zeta: f64,
}

/// Smallest exponent a growth fit reports.
pub const ZETA_MIN: f64 = 0.05;

/// Fit `1/γ_n ≤ c_zeta n^ζ` over `n = 1..gamma.len()`.
pub fn fit_zeta(gamma: &[f64]) -> Result<ZetaFit> {
    let pts: Vec<(f64, f64)> = gamma.iter().enumerate().skip(1).map(|(n, g)| (n as f64, 1.0 / g)).collect();
    validate(&pts)?;
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let zeta = least_squares(&x, &y).slope.max(ZETA_MIN);
    let c_zeta = pts.iter().map(|&(n, v)| v.ln() - zeta * n.ln()).fold(f64::NEG_INFINITY, f64::max).exp();
    Ok(ZetaFit { zeta, c_zeta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)], DecayKind::Polynomial).is_err());
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.3), (4.0, 0.1)], DecayKind::Polynomial).is_err());
        assert!(fit_decay(&[(1.0, 1.0), (2.0, -1.0), (3.0, 0.3), (4.0, 0.1)], DecayKind::Exponential).is_err());
    }

    #[test]
    fn zeta_floor_and_envelope() {
        let z = fit_zeta(&[1.0, 0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(z.zeta, ZETA_MIN);
        assert!((z.c_zeta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|n| (n as f64, 2.0 * (n as f64).powi(-2))).collect();
        let f = fit_decay(&pts, DecayKind::Polynomial).unwrap();
        assert!((f.c0 - 2.0).abs() < 1e-10 && (f.alpha - 2.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_exponential() {
        let pts: Vec<(f64, f64)> = (1..=12).map(|n| (n as f64, (-(n as f64)).exp())).collect();
        let f = fit_decay(&pts, DecayKind::Exponential).unwrap();
        assert!((f.alpha - 1.0).abs() < 1e-5, "{f:?}");
        assert!((f.c1 - 1.0).abs() < 1e-4 && (f.c0 - 1.0).abs() < 1e-3, "{f:?}");
        assert!(f.r2 > 0.999_999);
    }
}
