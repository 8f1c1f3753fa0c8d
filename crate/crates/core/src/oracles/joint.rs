use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::klotz::{in_region, KlotzParams};
use crate::quadrature::{log_sum_exp, KahanSum};

/// Tolerance on the total mass of a discrete joint prior.
pub const MASS_TOL: f64 = 1e-12;

/// A point mass at `(x, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub lambda: f64,
    pub mass: f64,
}

/// A joint prior over `R` with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteJointPrior {
    atoms: Vec<Atom>,
}

impl DiscreteJointPrior {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidPrior("joint prior has no atoms".into()));
        }
        let mut total = KahanSum::default();
        for a in &atoms {
            if a.mass <= 0.0 || !a.mass.is_finite() {
                return Err(Error::InvalidPrior(format!(
                    "atom at ({}, {}) has non-positive mass {}",
                    a.x, a.lambda, a.mass
                )));
            }
            if !in_region(a.x, a.lambda) {
                return Err(Error::OutsideRegion {
                    x: a.x,
                    lambda: a.lambda,
                });
            }
            total.add(a.mass);
        }
        let total = total.total();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPrior(format!(
                "joint prior masses sum to {total}, not 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// Drops zero-mass atoms and rescales the rest to total 1.
    pub fn normalized(atoms: Vec<Atom>) -> Result<Self> {
        let mut total = KahanSum::default();
        for a in &atoms {
            total.add(a.mass);
        }
        let total = total.total();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidPrior("joint prior has no mass".into()));
        }
        let atoms = atoms
            .into_iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| Atom {
                mass: a.mass / total,
                ..a
            })
            .collect();
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    fn mass_where(&self, pred: impl Fn(&Atom) -> bool) -> f64 {
        let mut s = KahanSum::default();
        for a in self.atoms.iter().filter(|a| pred(a)) {
            s.add(a.mass);
        }
        s.total()
    }

    /// `P(X <= b)`.
    pub fn mass_below(&self, b: f64) -> f64 {
        self.mass_where(|a| a.x <= b)
    }

    /// `P(Λ < X)`, the negative-dependence doubt.
    pub fn negative_doubt(&self) -> f64 {
        self.mass_where(|a| a.lambda < a.x)
    }

    /// `P(Λ > X)`, the positive-dependence doubt.
    pub fn positive_doubt(&self) -> f64 {
        self.mass_where(|a| a.lambda > a.x)
    }

    /// `P(X <= b | n failure-free demands)`.
    pub fn posterior(&self, b: f64, n: u64) -> Result<f64> {
        if n == 0 {
            return Ok(self.mass_below(b));
        }
        let terms: Vec<(bool, f64)> = self
            .atoms
            .iter()
            .map(|a| {
                let ln_l = KlotzParams::new(a.x, a.lambda)
                    .expect("atoms are validated")
                    .ln_likelihood_ff(n);
                (a.x <= b, ln_l + a.mass.ln())
            })
            .collect();
        let ln_total = log_sum_exp(terms.iter().map(|t| t.1));
        if ln_total == f64::NEG_INFINITY {
            return Err(Error::ZeroLikelihood);
        }
        let ln_below = log_sum_exp(terms.iter().filter(|t| t.0).map(|t| t.1));
        Ok((ln_below - ln_total).exp().min(1.0))
    }
}
