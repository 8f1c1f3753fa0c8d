//! Independent brute-force checks of the analytic pipeline.

pub mod conjugate;
pub mod grid;
pub mod joint;
pub mod mc;
pub mod suite;

pub use conjugate::beta_conjugate_posterior;
pub use grid::{grid_infimum, grid_infimum_exhaustive, GridResult, GridSpec, Placement};
pub use joint::{Atom, DiscreteJointPrior};
pub use mc::{mc_likelihood, McEstimate};
pub use suite::{run_oracle_suite, OracleCheck, SuiteOptions, SuiteReport};
