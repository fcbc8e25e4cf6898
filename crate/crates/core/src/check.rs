//! One-sided inequality records shared by the analysis and the rate auditor.

use serde::{Deserialize, Serialize};

/// Relative slack of every audited inequality.
pub const REL_SLACK: f64 = 1e-9;
/// Absolute slack of every audited inequality.
pub const ABS_SLACK: f64 = 1e-12;

/// `lhs ≤ rhs·(1 + 1e-9) + 1e-12`.
pub fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + REL_SLACK) + ABS_SLACK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    /// `n`, or `(N, K, m)` for product bounds, as a short label.
    pub index: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    /// `rhs − lhs`; negative on failure.
    pub margin: Option<f64>,
    #[serde(flatten)]
    pub status: Status,
}

impl Check {
    /// Record `lhs ≤ rhs`. A non-finite side fails unless `rhs` is `+∞`.
    pub fn le(id: impl Into<String>, index: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let ok = !lhs.is_nan() && !rhs.is_nan() && (rhs == f64::INFINITY || (lhs.is_finite() && holds(lhs, rhs)));
        Self {
            id: id.into(),
            index: index.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            margin: Some(rhs - lhs),
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    pub fn skipped(id: impl Into<String>, index: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            index: index.into(),
            lhs: None,
            rhs: None,
            margin: None,
            status: Status::Skipped(reason.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}
