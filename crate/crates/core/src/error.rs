use thiserror::Error;

/// Which half of the doubt constraints a failure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoubtSide {
    /// Negative dependence mass `phi1`, placed below the bound.
    Lower,
    /// Positive dependence mass `phi2`, placed above the bound.
    Upper,
}

impl std::fmt::Display for DoubtSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DoubtSide::Lower => f.write_str("phi1 <= P(X <= b)"),
            DoubtSide::Upper => f.write_str("phi2 <= P(X > b)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("({x}, {lambda}) is outside the feasible region R")]
    OutsideRegion { x: f64, lambda: f64 },

    #[error(
        "target {target:e} is outside the attainable range [{lo:e}, {hi:e}] of the {branch} branch"
    )]
    TargetOutOfRange {
        branch: &'static str,
        target: f64,
        lo: f64,
        hi: f64,
    },

    #[error("PK4 violated: requires {side}, but {required} > {available}")]
    Pk4Violated {
        side: DoubtSide,
        required: f64,
        available: f64,
    },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("quadrature did not converge: {panels} panels, relative error estimate {rel_error:e}")]
    Quadrature { panels: usize, rel_error: f64 },

    #[error(
        "confidence indistinguishable from 0: denominator integral underflowed (log Q = +inf)"
    )]
    DenominatorUnderflow,

    #[error("total likelihood of the joint prior is zero")]
    ZeroLikelihood,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for the prior-knowledge feasibility failures (CLI exit code 2).
    pub fn is_pk_violation(&self) -> bool {
        matches!(self, Error::Pk4Violated { .. })
    }

    /// True for numerical failures (CLI exit code 3).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::TargetOutOfRange { .. }
                | Error::Quadrature { .. }
                | Error::DenominatorUnderflow
        )
    }
}

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "[0, 1]",
        })
    }
}
