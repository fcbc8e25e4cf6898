//! Generalized empirical interpolation on 1D grids.
//!
//! The crate covers the full pipeline: synthetic snapshot families and
//! measurement dictionaries ([`families`]), the greedy co-selection of basis
//! functions and functionals ([`greedy`]), interpolation and reconstruction
//! from measurements ([`interp`]), the quantities the convergence theory
//! compares ([`analysis`]) and an auditor that checks every explicit bound
//! against measured sequences ([`rates`]).

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod artifact;
pub mod check;
pub mod config;
pub mod error;
pub mod families;
pub mod greedy;
pub mod interp;
pub mod rates;
pub mod space;

pub use artifact::ArtifactFile;
pub use config::RunConfig;
pub use error::{GeimError, Result};
pub use greedy::{run_geim, GreedyConfig, GreedyResult, SubsetSchedule};
pub use interp::InterpolationSystem;
pub use space::{inner, norm, DiscreteFunction, FunctionSet, Functional, Grid, NormMode};
