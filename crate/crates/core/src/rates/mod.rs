//! Bound auditor: explicit constants of the rate lemmas and the checks that
//! compare them with the sequences of an analysed run.

pub mod audit;
pub mod coeffs;
pub mod fit;
pub mod theorem;

pub use audit::{audit_run, fit_run, AuditConstants, AuditOptions, RateAudit, RunFits, Summary};
pub use coeffs::{
    beta_coeff, beta_one, beta_sequence, c1_zeta_constant, c2_rate, gamma_nonincreasing, index_split, monotone_coeff,
    IndexSplit, Regime,
};
pub use fit::{fit_decay, fit_sequence, fit_zeta, DecayFit, DecayKind, ZetaFit};
pub use theorem::{
    check_main_theorem, check_window_bound, general_bound, main_theorem_sides, pair_bound, sweep_indices, Space,
};

pub use crate::analysis::gamma_sequence;
