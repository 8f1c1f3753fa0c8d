//! Continuous priors over the probability of failure on demand.
//!
//! Two families are shipped: Beta densities (evaluated in log space so the
//! endpoints and very large shape parameters behave) and continuous
//! piecewise-linear densities on knots, whose CDF is the exact trapezoid
//! integral. Both are immutable after construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::quadrature::{integrate_ln, LogIntegral, QuadOptions};
use crate::special::{beta_inc, ln_beta};

/// Shape parameters of a Beta distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidPrior(format!(
                "beta shapes must be positive and finite, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

/// Beta density with its normalising constant cached.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPrior {
    params: BetaParams,
    ln_norm: f64,
}

impl BetaPrior {
    pub fn new(params: BetaParams) -> Self {
        Self {
            params,
            ln_norm: ln_beta(params.alpha, params.beta),
        }
    }

    pub fn params(&self) -> BetaParams {
        self.params
    }

    fn ln_density(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        let BetaParams { alpha, beta } = self.params;
        xlogy(alpha - 1.0, x) + xlog1py(beta - 1.0, -x) - self.ln_norm
    }
}

// a * ln(x), with 0 * ln(0) = 0
fn xlogy(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x.ln()
    }
}

// a * ln(1 + y), with 0 * ln(0) = 0
fn xlog1py(a: f64, y: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * y.ln_1p()
    }
}

/// Continuous piecewise-linear density through `(knots[i], densities[i])`,
/// zero outside `[knots[0], knots[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDensity {
    knots: Vec<f64>,
    densities: Vec<f64>,
    // CDF at each knot
    cumulative: Vec<f64>,
}

/// Relative tolerance on the trapezoid normalisation of a piecewise density.
pub const NORMALIZATION_TOL: f64 = 1e-9;

impl PiecewiseDensity {
    pub fn new(knots: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != densities.len() {
            return Err(Error::InvalidPrior(format!(
                "piecewise density needs >= 2 knots and one density per knot (got {} knots, {} densities)",
                knots.len(),
                densities.len()
            )));
        }
        if knots.iter().any(|k| !(0.0..=1.0).contains(k)) {
            return Err(Error::InvalidPrior("knots must lie in [0, 1]".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPrior(
                "knots must be strictly increasing".into(),
            ));
        }
        if densities.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidPrior(
                "densities must be finite and non-negative".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..knots.len() {
            acc += 0.5 * (densities[i] + densities[i - 1]) * (knots[i] - knots[i - 1]);
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidPrior(format!(
                "piecewise density integrates to {acc}, not 1"
            )));
        }
        Ok(Self {
            knots,
            densities,
            cumulative,
        })
    }

    /// Rescale the densities so they integrate to one.
    pub fn normalized(knots: Vec<f64>, mut densities: Vec<f64>) -> Result<Self> {
        let total: f64 = knots
            .windows(2)
            .zip(densities.windows(2))
            .map(|(k, d)| 0.5 * (d[0] + d[1]) * (k[1] - k[0]))
            .sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidPrior("piecewise density has no mass".into()));
        }
        densities.iter_mut().for_each(|d| *d /= total);
        Self::new(knots, densities)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.knots[0] || x > *self.knots.last().unwrap() {
            return None;
        }
        let i = self.knots.partition_point(|&k| k <= x);
        Some(i.saturating_sub(1).min(self.knots.len() - 2))
    }

    fn density(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(i) => {
                let t = (x - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
                self.densities[i] + t * (self.densities[i + 1] - self.densities[i])
            }
        }
    }

    fn cdf(&self, u: f64) -> f64 {
        if u <= self.knots[0] {
            return 0.0;
        }
        if u >= *self.knots.last().unwrap() {
            return 1.0;
        }
        let i = self.segment(u).unwrap();
        let d_u = self.density(u);
        let partial = 0.5 * (self.densities[i] + d_u) * (u - self.knots[i]);
        (self.cumulative[i] + partial).clamp(0.0, 1.0)
    }
}

/// A PK1 prior: a continuous density of the pfd on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    Beta(BetaPrior),
    Piecewise(PiecewiseDensity),
}

impl PriorSpec {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Ok(PriorSpec::Beta(BetaPrior::new(BetaParams::new(
            alpha, beta,
        )?)))
    }

    pub fn uniform() -> Self {
        PriorSpec::Beta(BetaPrior::new(BetaParams {
            alpha: 1.0,
            beta: 1.0,
        }))
    }

    pub fn piecewise(knots: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        Ok(PriorSpec::Piecewise(PiecewiseDensity::new(
            knots, densities,
        )?))
    }

    pub fn beta_params(&self) -> Option<BetaParams> {
        match self {
            PriorSpec::Beta(b) => Some(b.params),
            PriorSpec::Piecewise(_) => None,
        }
    }

    /// Density `f(x)`; `+inf` where a Beta density diverges at an endpoint.
    pub fn density(&self, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        Ok(match self {
            PriorSpec::Beta(b) => b.ln_density(x).exp(),
            PriorSpec::Piecewise(p) => p.density(x),
        })
    }

    /// `ln f(x)`, `-inf` outside `[0, 1]` and where the density vanishes.
    pub fn ln_density(&self, x: f64) -> f64 {
        match self {
            PriorSpec::Beta(b) => b.ln_density(x),
            PriorSpec::Piecewise(p) => p.density(x).ln(),
        }
    }

    /// `P(X <= u)`.
    pub fn cdf(&self, u: f64) -> Result<f64> {
        check_unit("u", u)?;
        Ok(match self {
            PriorSpec::Beta(b) => beta_inc(b.params.alpha, b.params.beta, u).0,
            PriorSpec::Piecewise(p) => p.cdf(u),
        })
    }

    /// `P(X > u)`, accurate when it is small.
    pub fn sf(&self, u: f64) -> Result<f64> {
        check_unit("u", u)?;
        Ok(match self {
            PriorSpec::Beta(b) => beta_inc(b.params.alpha, b.params.beta, u).1,
            PriorSpec::Piecewise(p) => 1.0 - p.cdf(u),
        })
    }

    /// `∫_lo^hi f(x) dx`, evaluated from whichever tail keeps precision.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        check_unit("lo", lo)?;
        check_unit("hi", hi)?;
        if hi <= lo {
            return Ok(0.0);
        }
        let c_lo = self.cdf(lo)?;
        if c_lo > 0.5 {
            Ok((self.sf(lo)? - self.sf(hi)?).max(0.0))
        } else {
            Ok((self.cdf(hi)? - c_lo).max(0.0))
        }
    }

    /// Smallest-bracket bisection inverse of the CDF; `|cdf(u) - p| <= 1e-12`
    /// whenever the density is resolvable in double precision.
    pub fn inverse_cdf(&self, p: f64) -> Result<f64> {
        check_unit("p", p)?;
        if p == 0.0 {
            return Ok(0.0);
        }
        if p == 1.0 {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..2200 {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            let c = self.cdf(mid)?;
            if c == p {
                return Ok(mid);
            }
            if c < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (c_lo, c_hi) = (self.cdf(lo)?, self.cdf(hi)?);
        Ok(if (p - c_lo).abs() <= (c_hi - p).abs() {
            lo
        } else {
            hi
        })
    }

    /// `∫_a^b exp(ln_w(x)) f(x) dx`, computed in log space with the prior's
    /// own kinks and the caller's `splits` as mandatory panel boundaries.
    pub fn weighted_integral<W: Fn(f64) -> f64>(
        &self,
        ln_w: W,
        a: f64,
        b: f64,
        splits: &[f64],
        opts: &QuadOptions,
    ) -> Result<LogIntegral> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        let mut all: Vec<f64> = splits.to_vec();
        all.extend_from_slice(self.breakpoints());
        integrate_ln(|x| ln_w(x) + self.ln_density(x), a, b, &all, opts)
    }

    /// Points where the density is not smooth.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            PriorSpec::Beta(_) => &[],
            PriorSpec::Piecewise(p) => &p.knots,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            PriorSpec::Beta(b) => b.params.mean(),
            PriorSpec::Piecewise(p) => {
                // exact for piecewise linear: ∫ x (d0 + s (x - k0)) dx per segment
                p.knots
                    .windows(2)
                    .zip(p.densities.windows(2))
                    .map(|(k, d)| {
                        let h = k[1] - k[0];
                        h * (d[0] * (2.0 * k[0] + k[1]) + d[1] * (k[0] + 2.0 * k[1])) / 6.0
                    })
                    .sum()
            }
        }
    }

    pub fn to_config(&self) -> PriorConfig {
        match self {
            PriorSpec::Beta(b) => PriorConfig::Beta {
                alpha: b.params.alpha,
                beta: b.params.beta,
            },
            PriorSpec::Piecewise(p) => PriorConfig::Piecewise {
                knots: p.knots.clone(),
                densities: p.densities.clone(),
            },
        }
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorSpec::Beta(b) => write!(f, "beta({},{})", b.params.alpha, b.params.beta),
            PriorSpec::Piecewise(p) => write!(f, "piecewise({} knots)", p.knots.len()),
        }
    }
}

/// Structured prior record, e.g. `{kind = "beta", alpha = 2, beta = 20000}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PriorConfig {
    Beta {
        alpha: f64,
        beta: f64,
    },
    Piecewise {
        knots: Vec<f64>,
        densities: Vec<f64>,
    },
}

impl TryFrom<PriorConfig> for PriorSpec {
    type Error = Error;

    fn try_from(cfg: PriorConfig) -> Result<Self> {
        match cfg {
            PriorConfig::Beta { alpha, beta } => PriorSpec::beta(alpha, beta),
            PriorConfig::Piecewise { knots, densities } => PriorSpec::piecewise(knots, densities),
        }
    }
}

/// Short command-line form: `beta:ALPHA,BETA`.
impl FromStr for PriorConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPrior(format!("expected `beta:ALPHA,BETA`, got `{s}`"));
        let rest = s.strip_prefix("beta:").ok_or_else(bad)?;
        let (a, b) = rest.split_once(',').ok_or_else(bad)?;
        let alpha = a.trim().parse().map_err(|_| bad())?;
        let beta = b.trim().parse().map_err(|_| bad())?;
        Ok(PriorConfig::Beta { alpha, beta })
    }
}
