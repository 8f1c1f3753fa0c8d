//! Conservative Bayesian confidence bounds on the probability of failure on
//! demand (pfd) after failure-free testing, when the independence of test
//! outcomes is in doubt.
//!
//! Test outcomes follow the Klotz model, a stationary Markov chain with
//! marginal pfd `x` and failure-after-failure probability `λ`. The assessor
//! supplies a prior density for `x`, a target bound `b`, and doubts `phi1` /
//! `phi2`: prior probabilities that outcomes are negatively (`λ < x`) or
//! positively (`λ > x`) correlated. [`conservative_confidence`] returns the
//! smallest posterior confidence in `pfd <= b` over every joint prior
//! consistent with those inputs.
//!
//! ```
//! use cbi_core::{conservative_confidence, AssessmentProblem, EngineOptions, PriorSpec};
//!
//! let prior = PriorSpec::beta(1.0, 10_000.0).unwrap();
//! let problem = AssessmentProblem::new(prior, 1e-4, 10_000, 0.05, 0.05).unwrap();
//! let r = conservative_confidence(&problem, &EngineOptions::default()).unwrap();
//! assert!(r.conservative_confidence < r.iid_confidence);
//! ```

pub mod cutpoints;
pub mod engine;
pub mod error;
pub mod klotz;
pub mod oracles;
pub mod prior;
pub mod quadrature;
pub mod report;
pub mod shape;
pub mod special;

pub use cutpoints::{
    classify_case, solve_cutpoints, Case, CutPoints, DoubtInterval, SolverOptions,
};
pub use engine::{
    asymptotic_q_bounds, compute_q, conservative_confidence, iid_posterior,
    posterior_for_joint_prior, worst_case_prior, AssessmentProblem, ConfidenceResult,
    EngineOptions, QBounds, QValue,
};
pub use error::{DoubtSide, Error, Result};
pub use klotz::{
    in_region, likelihood_ff, ln_likelihood_ff, ChainOutcome, KlotzParams, TransitionProbs,
};
pub use oracles::DiscreteJointPrior;
pub use prior::{BetaParams, PriorConfig, PriorSpec};
pub use quadrature::QuadOptions;
pub use report::ResultRow;
pub use shape::{Branch, GFunction, GFunctionContext};
