//! Conservative posterior confidence.
//!
//! For an assessment `(b, n, f, phi1, phi2)` the worst-case confidence in
//! `pfd <= b` after `n` failure-free demands is `1 / (1 + Q)` with
//!
//! ```text
//!        ∫_b^1 [(1-x)^n off (c1_high, c2_high); (1-x) on it] f(x) dx
//! Q = ------------------------------------------------------------------------
//!      ∫_0^b [(1-x)^n off (c1_low, c2_low); (1-2x)^(n-1)/(1-x)^(n-2) on it] f(x) dx
//! ```
//!
//! Every integral is accumulated in log space and split at the cut-points.

use serde::Serialize;

use crate::cutpoints::{solve_cutpoints, CutPoints, SolverOptions};
use crate::error::{check_unit, DoubtSide, Error, Result};
use crate::oracles::joint::{Atom, DiscreteJointPrior};
use crate::prior::PriorSpec;
use crate::quadrature::{log_add, log_sum_exp, LogIntegral, QuadOptions};
use crate::shape::GFunctionContext;
use crate::special::beta_inc;

/// Inputs of one assessment, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentProblem {
    b: f64,
    n: u64,
    prior: PriorSpec,
    phi1: f64,
    phi2: f64,
}

impl AssessmentProblem {
    pub fn new(prior: PriorSpec, b: f64, n: u64, phi1: f64, phi2: f64) -> Result<Self> {
        if !(b > 0.0 && b < 0.5) {
            return Err(Error::Domain {
                what: "b",
                value: b,
                domain: "(0, 1/2)",
            });
        }
        if n < 2 {
            return Err(Error::InvalidProblem(format!(
                "n = {n}: the conservative bound needs n >= 2 failure-free demands \
                 (use the i.i.d. posterior for n < 2)"
            )));
        }
        check_unit("phi1", phi1)?;
        check_unit("phi2", phi2)?;
        if phi1 + phi2 > 1.0 {
            return Err(Error::InvalidProblem(format!(
                "phi1 + phi2 = {} exceeds 1",
                phi1 + phi2
            )));
        }
        let below = prior.cdf(b)?;
        if phi1 > below {
            return Err(Error::Pk4Violated {
                side: DoubtSide::Lower,
                required: phi1,
                available: below,
            });
        }
        let above = prior.sf(b)?;
        if phi2 > above {
            return Err(Error::Pk4Violated {
                side: DoubtSide::Upper,
                required: phi2,
                available: above,
            });
        }
        Ok(Self {
            b,
            n,
            prior,
            phi1,
            phi2,
        })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(self.prior.clone(), self.b, n, self.phi1, self.phi2)
    }

    pub fn with_doubts(&self, phi1: f64, phi2: f64) -> Result<Self> {
        Self::new(self.prior.clone(), self.b, self.n, phi1, phi2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineOptions {
    pub quad: QuadOptions,
    pub solver: SolverOptions,
}

/// `Q` as a ratio of two log-space integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QValue {
    pub ln_numerator: f64,
    pub ln_denominator: f64,
    /// Relative quadrature error estimate of `Q`.
    pub rel_error: f64,
    pub panels: usize,
}

impl QValue {
    fn from_parts(num: LogIntegral, den: LogIntegral) -> Result<Self> {
        if den.ln_value == f64::NEG_INFINITY {
            return Err(Error::DenominatorUnderflow);
        }
        Ok(Self {
            ln_numerator: num.ln_value,
            ln_denominator: den.ln_value,
            rel_error: num.rel_error() + den.rel_error(),
            panels: num.panels + den.panels,
        })
    }

    pub fn ln_q(&self) -> f64 {
        self.ln_numerator - self.ln_denominator
    }

    pub fn q(&self) -> f64 {
        self.ln_q().exp()
    }

    /// `1 / (1 + Q)` without overflow for huge or tiny `Q`.
    pub fn confidence(&self) -> f64 {
        confidence_from_ln_q(self.ln_q())
    }

    /// Absolute error estimate of [`confidence`](Self::confidence).
    pub fn confidence_error(&self) -> f64 {
        let c = self.confidence();
        c * (1.0 - c) * self.rel_error
    }
}

/// `1 / (1 + e^{ln_q})`.
pub fn confidence_from_ln_q(ln_q: f64) -> f64 {
    if ln_q > 0.0 {
        let t = (-ln_q).exp();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + ln_q.exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceResult {
    pub q_value: f64,
    pub ln_q: f64,
    pub conservative_confidence: f64,
    pub iid_confidence: f64,
    pub cutpoints: CutPoints,
    /// Absolute error estimate of the conservative confidence.
    pub quadrature_error: f64,
    pub panels: usize,
}

fn ln_pow_one_minus(n: u64) -> impl Fn(f64) -> f64 {
    move |x: f64| n as f64 * (-x).ln_1p()
}

// ln L(x, 0; n) = (n-1) ln(1-2x) - (n-2) ln(1-x), only for x < 1/2
fn ln_alternating(n: u64) -> impl Fn(f64) -> f64 {
    move |x: f64| (n - 1) as f64 * (-2.0 * x).ln_1p() - (n as f64 - 2.0) * (-x).ln_1p()
}

fn one_minus(x: f64) -> f64 {
    (-x).ln_1p()
}

fn piece<W: Fn(f64) -> f64>(
    prior: &PriorSpec,
    ln_w: W,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<LogIntegral> {
    if b <= a {
        return Ok(LogIntegral::ZERO);
    }
    prior.weighted_integral(ln_w, a, b, &[], opts)
}

/// The numerator and denominator of `Q` for given cut-points.
pub fn q_for_cutpoints(
    prior: &PriorSpec,
    b: f64,
    n: u64,
    cp: &CutPoints,
    opts: &QuadOptions,
) -> Result<QValue> {
    assert!(
        cp.c2_low < 0.5,
        "the λ = 0 likelihood is only used below 1/2"
    );
    let pow = ln_pow_one_minus(n);
    let num = piece(prior, &pow, b, cp.c1_high, opts)?
        .add(&piece(prior, one_minus, cp.c1_high, cp.c2_high, opts)?)
        .add(&piece(prior, &pow, cp.c2_high, 1.0, opts)?);
    let den = piece(prior, &pow, 0.0, cp.c1_low, opts)?
        .add(&piece(
            prior,
            ln_alternating(n),
            cp.c1_low,
            cp.c2_low,
            opts,
        )?)
        .add(&piece(prior, &pow, cp.c2_low, b, opts)?);
    QValue::from_parts(num, den)
}

/// Cut-points and `Q` for a problem.
pub fn compute_q(problem: &AssessmentProblem, opts: &EngineOptions) -> Result<(QValue, CutPoints)> {
    let ctx = GFunctionContext::new(problem.n)?;
    let cp = solve_cutpoints(
        &problem.prior,
        &ctx,
        problem.b,
        problem.phi1,
        problem.phi2,
        &opts.solver,
    )?;
    let q = q_for_cutpoints(&problem.prior, problem.b, problem.n, &cp, &opts.quad)?;
    Ok((q, cp))
}

/// `Q` of the i.i.d. posterior: `∫_b^1 (1-x)^n f / ∫_0^b (1-x)^n f`.
pub fn iid_q(prior: &PriorSpec, b: f64, n: u64, opts: &QuadOptions) -> Result<QValue> {
    let pow = ln_pow_one_minus(n);
    let num = piece(prior, &pow, b, 1.0, opts)?;
    let den = piece(prior, &pow, 0.0, b, opts)?;
    QValue::from_parts(num, den)
}

/// `P(X <= b | n failure-free i.i.d. demands)` by quadrature.
pub fn iid_posterior(prior: &PriorSpec, b: f64, n: u64, opts: &QuadOptions) -> Result<f64> {
    check_unit("b", b)?;
    if n == 0 {
        return prior.cdf(b);
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    if b == 1.0 {
        return Ok(1.0);
    }
    Ok(iid_q(prior, b, n, opts)?.confidence())
}

/// Closed form of [`iid_posterior`] for Beta priors: `I_b(α, β + n)`.
pub fn iid_posterior_closed_form(prior: &PriorSpec, b: f64, n: u64) -> Option<f64> {
    prior
        .beta_params()
        .map(|p| beta_inc(p.alpha, p.beta + n as f64, b).0)
}

pub fn conservative_confidence(
    problem: &AssessmentProblem,
    opts: &EngineOptions,
) -> Result<ConfidenceResult> {
    let (q, cutpoints) = compute_q(problem, opts)?;
    let iid = iid_q(&problem.prior, problem.b, problem.n, &opts.quad)?;
    Ok(ConfidenceResult {
        q_value: q.q(),
        ln_q: q.ln_q(),
        conservative_confidence: q.confidence(),
        iid_confidence: iid.confidence(),
        cutpoints,
        quadrature_error: q.confidence_error(),
        panels: q.panels,
    })
}

/// Posterior confidence in `pfd <= b` for an explicit discrete joint prior.
pub fn posterior_for_joint_prior(joint: &DiscreteJointPrior, b: f64, n: u64) -> Result<f64> {
    joint.posterior(b, n)
}

/// Lower and upper bounds on `Q` from chord and tangent lines of `(1-x)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QBounds {
    pub lower: f64,
    /// `+inf` when `phi2 > 0`.
    pub upper: f64,
    /// `Q -> inf` as `n -> inf`, i.e. confidence tends to zero.
    pub diverges: bool,
}

struct Moments {
    mass: f64,
    mean: f64,
}

fn moments(prior: &PriorSpec, a: f64, b: f64, opts: &QuadOptions) -> Result<Moments> {
    let mass = prior.interval_mass(a, b)?;
    if b <= a || mass == 0.0 {
        return Ok(Moments {
            mass: 0.0,
            mean: 0.5 * (a + b),
        });
    }
    let first = prior.weighted_integral(|x: f64| x.ln(), a, b, &[], opts)?;
    Ok(Moments {
        mass,
        mean: (first.value() / mass).clamp(a, b),
    })
}

/// Bounds on `Q` that hold for every `n`.
///
/// The upper bound, for `phi2 = 0`, replaces each `(1-x)^n` integral below `b`
/// by its tangent at the conditional mean and the one above `b` by its chord
/// over `[b, 1]`, and drops the λ = 0 term. It tends to zero as `n` grows.
/// The lower bound uses the tangent above `b` and the chord over `[0, b]`.
pub fn asymptotic_q_bounds(problem: &AssessmentProblem, opts: &EngineOptions) -> Result<QBounds> {
    let ctx = GFunctionContext::new(problem.n)?;
    let cp = solve_cutpoints(
        &problem.prior,
        &ctx,
        problem.b,
        problem.phi1,
        problem.phi2,
        &opts.solver,
    )?;
    asymptotic_q_bounds_for(problem, &cp, &opts.quad)
}

pub fn asymptotic_q_bounds_for(
    problem: &AssessmentProblem,
    cp: &CutPoints,
    opts: &QuadOptions,
) -> Result<QBounds> {
    let (prior, b, n) = (&problem.prior, problem.b, problem.n as f64);
    let above = moments(prior, b, 1.0, opts)?;
    let below = moments(prior, 0.0, b, opts)?;
    let ln1mb = (-b).ln_1p();

    // tangent above b, chord (0, b) below
    let ln_chord_below = log_add((-below.mean / b).ln_1p(), (below.mean / b).ln() + n * ln1mb);
    let lower =
        (n * (-above.mean).ln_1p() + above.mass.ln() - ln_chord_below - below.mass.ln()).exp();

    if problem.phi2 > 0.0 {
        return Ok(QBounds {
            lower,
            upper: f64::INFINITY,
            diverges: true,
        });
    }
    let first = moments(prior, 0.0, cp.c1_low, opts)?;
    let second = moments(prior, cp.c2_low, b, opts)?;
    let ln_num = (-above.mean).ln_1p() - ln1mb + above.mass.ln();
    let ln_den = log_sum_exp([
        n * ((-first.mean).ln_1p() - ln1mb) + first.mass.ln(),
        n * ((-second.mean).ln_1p() - ln1mb) + second.mass.ln(),
    ]);
    Ok(QBounds {
        lower,
        upper: (ln_num - ln_den).exp(),
        diverges: false,
    })
}

/// The worst-case joint prior for given cut-points, discretized into about
/// `points` atoms of equal prior mass within each piece: diagonal mass off
/// the doubt intervals, λ = 0 on `[c1_low, c2_low]` and λ = 1 on
/// `[c1_high, c2_high]`.
pub fn worst_case_prior(
    prior: &PriorSpec,
    b: f64,
    cp: &CutPoints,
    points: usize,
) -> Result<DiscreteJointPrior> {
    #[derive(Clone, Copy)]
    enum Edge {
        Diagonal,
        Zero,
        One,
    }
    let pieces = [
        (0.0, cp.c1_low, Edge::Diagonal),
        (cp.c1_low, cp.c2_low, Edge::Zero),
        (cp.c2_low, b, Edge::Diagonal),
        (b, cp.c1_high, Edge::Diagonal),
        (cp.c1_high, cp.c2_high, Edge::One),
        (cp.c2_high, 1.0, Edge::Diagonal),
    ];
    let mut atoms = Vec::with_capacity(points + pieces.len());
    for (lo, hi, edge) in pieces {
        let mass = prior.interval_mass(lo, hi)?;
        if mass <= 0.0 {
            continue;
        }
        let k = ((mass * points as f64).round() as usize).max(1);
        let mut left = lo;
        for j in 1..=k {
            let right = if j == k {
                hi
            } else {
                quantile_within(prior, lo, hi, mass * j as f64 / k as f64)?
            };
            let m = prior.interval_mass(left, right)?;
            if m > 0.0 {
                let x = 0.5 * (left + right);
                let lambda = match edge {
                    Edge::Diagonal => x,
                    Edge::Zero => 0.0,
                    Edge::One => 1.0,
                };
                atoms.push(Atom { x, lambda, mass: m });
            }
            left = right;
        }
    }
    DiscreteJointPrior::normalized(atoms)
}

// x in [lo, hi] with ∫_lo^x f = p
fn quantile_within(prior: &PriorSpec, lo: f64, hi: f64, p: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    loop {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            return Ok(mid);
        }
        if prior.interval_mass(lo, mid)? < p {
            a = mid;
        } else {
            b = mid;
        }
    }
}
