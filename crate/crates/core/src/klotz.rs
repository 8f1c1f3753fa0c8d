//! The Klotz model: a stationary two-state Markov chain of possibly
//! dependent Bernoulli trials with marginal failure probability `x` and
//! failure-after-failure probability `lambda`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// absolute slack on the region's lower edge, so boundary points such as
// (0.6, 1/3) are not rejected by rounding in (1 - λ) x <= 1 - x
const REGION_SLACK: f64 = 4.0 * f64::EPSILON;

/// Membership in the feasible region `R`:
/// `0 <= x < 1` and `max{0, (2x - 1)/x} <= λ <= 1`.
pub fn in_region(x: f64, lambda: f64) -> bool {
    if !((0.0..1.0).contains(&x) && (0.0..=1.0).contains(&lambda)) {
        return false;
    }
    // λ >= (2x-1)/x  <=>  (1-λ) x <= 1 - x
    (1.0 - lambda) * x <= (1.0 - x) + REGION_SLACK
}

/// A point `(x, λ)` of the feasible region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlotzParams {
    x: f64,
    lambda: f64,
}

/// One-step transition probabilities of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProbs {
    /// `P(T_i = 1 | T_{i-1} = 1) = λ`
    pub fail_after_fail: f64,
    /// `P(T_i = 0 | T_{i-1} = 1) = 1 - λ`
    pub success_after_fail: f64,
    /// `P(T_i = 1 | T_{i-1} = 0) = (1 - λ) x / (1 - x)`
    pub fail_after_success: f64,
    /// `P(T_i = 0 | T_{i-1} = 0)`
    pub success_after_success: f64,
}

impl KlotzParams {
    pub fn new(x: f64, lambda: f64) -> Result<Self> {
        if in_region(x, lambda) {
            Ok(Self { x, lambda })
        } else {
            Err(Error::OutsideRegion { x, lambda })
        }
    }

    /// The independent (i.i.d.) point `λ = x`.
    pub fn independent(x: f64) -> Result<Self> {
        Self::new(x, x)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn fail_after_success(&self) -> f64 {
        ((1.0 - self.lambda) * self.x / (1.0 - self.x)).min(1.0)
    }

    pub fn transition_probs(&self) -> TransitionProbs {
        let p10 = self.fail_after_success();
        TransitionProbs {
            fail_after_fail: self.lambda,
            success_after_fail: 1.0 - self.lambda,
            fail_after_success: p10,
            success_after_success: 1.0 - p10,
        }
    }

    /// `ln L(x, λ; n)` for `n` failure-free demands.
    pub fn ln_likelihood_ff(&self, n: u64) -> f64 {
        assert!(n >= 1, "likelihood needs at least one demand");
        let head = (-self.x).ln_1p();
        if n == 1 {
            return head;
        }
        let p10 = self.fail_after_success();
        head + (n - 1) as f64 * (-p10).ln_1p()
    }

    /// `L(x, λ; n) = (1 - x) (1 - (1 - λ) x / (1 - x))^(n - 1)`.
    pub fn likelihood_ff(&self, n: u64) -> f64 {
        assert!(n >= 1, "likelihood needs at least one demand");
        if n == 1 {
            return 1.0 - self.x;
        }
        (1.0 - self.x) * ((n - 1) as f64 * (-self.fail_after_success()).ln_1p()).exp()
    }

    /// Draw `n` outcomes: `T_1` from the stationary marginal, then the chain.
    pub fn simulate_chain(&self, n: usize, seed: u64) -> ChainOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probs = self.transition_probs();
        let mut trials = Vec::with_capacity(n);
        let mut prev = None;
        for _ in 0..n {
            let p_fail = match prev {
                None => self.x,
                Some(1u8) => probs.fail_after_fail,
                Some(_) => probs.fail_after_success,
            };
            let t = u8::from(rng.random::<f64>() < p_fail);
            trials.push(t);
            prev = Some(t);
        }
        ChainOutcome { trials, seed }
    }

    /// True if one simulated run of `n` demands is failure-free; stops at the
    /// first failure.
    pub(crate) fn run_is_failure_free<R: Rng>(&self, n: u64, rng: &mut R) -> bool {
        if n == 0 {
            return true;
        }
        if rng.random::<f64>() < self.x {
            return false;
        }
        let p10 = self.fail_after_success();
        for _ in 1..n {
            if rng.random::<f64>() < p10 {
                return false;
            }
        }
        true
    }
}

/// Likelihood of `n >= 1` failure-free demands at any `(x, λ)` in the
/// closure of `R`, with the limit convention `L(1, 1; n) = 0`.
pub fn likelihood_ff(x: f64, lambda: f64, n: u64) -> Result<f64> {
    let ln = ln_likelihood_ff(x, lambda, n)?;
    if ln == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok(KlotzParams::new(x, lambda)?.likelihood_ff(n))
}

/// Log companion of [`likelihood_ff`]; `-inf` where the likelihood is zero.
pub fn ln_likelihood_ff(x: f64, lambda: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain {
            what: "n",
            value: 0.0,
            domain: "n >= 1",
        });
    }
    if x == 1.0 && lambda == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(KlotzParams::new(x, lambda)?.ln_likelihood_ff(n))
}

/// A simulated run of demands: 0 = success, 1 = failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainOutcome {
    pub trials: Vec<u8>,
    pub seed: u64,
}

impl ChainOutcome {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.trials.iter().filter(|&&t| t == 1).count()
    }

    pub fn failure_fraction(&self) -> f64 {
        self.failures() as f64 / self.trials.len() as f64
    }

    /// Empirical `P(T_i = 1 | T_{i-1} = 1)`; `None` if no failure precedes
    /// another trial.
    pub fn fail_after_fail_fraction(&self) -> Option<f64> {
        let mut after_fail = 0usize;
        let mut both = 0usize;
        for w in self.trials.windows(2) {
            if w[0] == 1 {
                after_fail += 1;
                both += usize::from(w[1] == 1);
            }
        }
        (after_fail > 0).then(|| both as f64 / after_fail as f64)
    }
}

/// Compact `0`/`1` text line.
impl fmt::Display for ChainOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self
            .trials
            .iter()
            .map(|&t| if t == 1 { '1' } else { '0' })
            .collect();
        f.write_str(&s)
    }
}
