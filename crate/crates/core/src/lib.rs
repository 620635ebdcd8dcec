//! Exact branch statistics for `N` repeated `n`-outcome quantum measurements.
//!
//! - [`model`]: Born-weight distributions and the multinomial class ensemble.
//! - [`typicality`]: weight concentration around `m_j / N = q_j` at finite `N`.
//! - [`validity`]: coefficient-independent validity assignments, the
//!   Born-frequency feasibility search and infeasibility certificates.
//! - [`chain`]: labeled product states and linear basis rewrites for the
//!   system / detector / observer chain.
//! - [`collapse`]: seeded Born-rule sampling baseline.
//!
//! All exact results use big-integer rationals.

pub mod chain;
pub mod collapse;
pub mod error;
pub mod model;
pub mod rational;
pub mod surd;
pub mod typicality;
pub mod validity;

pub use error::{Error, Result};
pub use model::{
    class_multiplicity, class_weight, enumerate_classes, validate_distribution, BranchClass,
    BranchEnsemble, OutcomeDistribution, DEFAULT_CLASS_CAP,
};
pub use rational::Rational;
pub use surd::Surd;
pub use typicality::{SampleSize, TypicalityReport};
pub use validity::{
    FrequencyVector, Feasibility, InfeasibilityCertificate, SolverLimits, ValidityAssignment,
};
