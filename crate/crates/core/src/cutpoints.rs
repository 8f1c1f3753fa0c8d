//! Cut-points of the worst-case prior.
//!
//! Below `b` the doubt mass `phi1` sits on the λ = 0 edge over
//! `[c1_low, c2_low]`; above `b` the mass `phi2` sits on the λ = 1 edge over
//! `[c1_high, c2_high]`. Each interval is a superlevel set of the relevant
//! `g` function clipped to its side of `b`, so it either has equal `g`
//! values at both ends or is pinned at `b`.

use std::fmt;

use serde::Serialize;

use crate::error::{check_unit, DoubtSide, Error, Result};
use crate::prior::PriorSpec;
use crate::shape::{Branch, GFunction, GFunctionContext};

/// Relative positions of `x_l`, `x_u` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// `x_l < b`, `x_u <= b`
    One,
    /// `x_l < b`, `x_u > b`
    Two,
    /// `x_l >= b`, `x_u <= b`
    Three,
    /// `x_l >= b`, `x_u > b`
    Four,
}

impl Case {
    pub fn id(self) -> u8 {
        match self {
            Case::One => 1,
            Case::Two => 2,
            Case::Three => 3,
            Case::Four => 4,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Ties `x_l = b` and `x_u = b` count as pinned.
pub fn classify_case(ctx: &GFunctionContext, b: f64) -> Case {
    let lower_pinned = ctx.x_l() >= b;
    let upper_pinned = ctx.x_u() <= b;
    match (lower_pinned, upper_pinned) {
        (false, true) => Case::One,
        (false, false) => Case::Two,
        (true, true) => Case::Three,
        (true, false) => Case::Four,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Tolerance on the doubt mass of each interval.
    pub eps: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            max_iterations: 200,
        }
    }
}

/// One doubt interval and its certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubtInterval {
    pub c1: f64,
    pub c2: f64,
    /// The end at `b` is fixed rather than set by equal `g` values.
    pub pinned: bool,
    pub iterations: usize,
    /// `|∫_{c1}^{c2} f - phi|`
    pub mass_residual: f64,
    /// `|g(c1) - g(c2)| / max(g(c1), g(c2))`; `None` when pinned.
    pub g_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutPoints {
    pub c1_low: f64,
    pub c2_low: f64,
    pub c1_high: f64,
    pub c2_high: f64,
    pub case: Case,
    pub lower: DoubtInterval,
    pub upper: DoubtInterval,
}

impl CutPoints {
    pub fn max_mass_residual(&self) -> f64 {
        self.lower.mass_residual.max(self.upper.mass_residual)
    }

    pub fn max_g_residual(&self) -> Option<f64> {
        match (self.lower.g_residual, self.upper.g_residual) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

fn check_bound(b: f64) -> Result<()> {
    if b > 0.0 && b < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "b",
            value: b,
            domain: "(0, 1/2)",
        })
    }
}

fn relative_gap(ln_a: f64, ln_b: f64) -> f64 {
    if ln_a == ln_b {
        0.0
    } else {
        -(-(ln_a - ln_b).abs()).exp_m1()
    }
}

// c in [0, hi] with ∫_c^hi f = phi
fn mass_to_left(prior: &PriorSpec, hi: f64, phi: f64) -> Result<f64> {
    let (mut lo_x, mut hi_x) = (0.0f64, hi);
    loop {
        let mid = 0.5 * (lo_x + hi_x);
        if mid == lo_x || mid == hi_x {
            break;
        }
        if prior.interval_mass(mid, hi)? > phi {
            lo_x = mid;
        } else {
            hi_x = mid;
        }
    }
    let e_lo = (prior.interval_mass(lo_x, hi)? - phi).abs();
    let e_hi = (prior.interval_mass(hi_x, hi)? - phi).abs();
    Ok(if e_lo < e_hi { lo_x } else { hi_x })
}

// w in [lo, 1] with ∫_lo^w f = phi
fn mass_to_right(prior: &PriorSpec, lo: f64, phi: f64) -> Result<f64> {
    let (mut lo_x, mut hi_x) = (lo, 1.0f64);
    loop {
        let mid = 0.5 * (lo_x + hi_x);
        if mid == lo_x || mid == hi_x {
            break;
        }
        if prior.interval_mass(lo, mid)? < phi {
            lo_x = mid;
        } else {
            hi_x = mid;
        }
    }
    let e_lo = (prior.interval_mass(lo, lo_x)? - phi).abs();
    let e_hi = (prior.interval_mass(lo, hi_x)? - phi).abs();
    Ok(if e_lo < e_hi { lo_x } else { hi_x })
}

fn degenerate(b: f64) -> DoubtInterval {
    DoubtInterval {
        c1: b,
        c2: b,
        pinned: false,
        iterations: 0,
        mass_residual: 0.0,
        g_residual: Some(0.0),
    }
}

/// `[c1_low, c2_low]` carrying `phi1` below `b`.
pub fn solve_lower_cutpoints(
    prior: &PriorSpec,
    ctx: &GFunctionContext,
    b: f64,
    phi1: f64,
    opts: &SolverOptions,
) -> Result<DoubtInterval> {
    check_bound(b)?;
    check_unit("phi1", phi1)?;
    let available = prior.cdf(b)?;
    if phi1 > available {
        return Err(Error::Pk4Violated {
            side: DoubtSide::Lower,
            required: phi1,
            available,
        });
    }
    if phi1 == 0.0 {
        return Ok(degenerate(b));
    }
    let pinned = |iterations| -> Result<DoubtInterval> {
        let c1 = mass_to_left(prior, b, phi1)?;
        Ok(DoubtInterval {
            c1,
            c2: b,
            pinned: true,
            iterations,
            mass_residual: (prior.interval_mass(c1, b)? - phi1).abs(),
            g_residual: None,
        })
    };
    let x_l = ctx.x_l();
    if x_l >= b {
        return pinned(0);
    }
    let ln_g = |x: f64| ctx.ln_eval(GFunction::Lower, x);
    let solve_c1 = |c2: f64| ctx.solve_on_branch_ln(GFunction::Lower, ln_g(c2)?, Branch::Ascending);
    let c = solve_c1(b)?;
    if prior.interval_mass(c, b)? < phi1 {
        return pinned(0);
    }
    let (mut lo, mut hi) = (x_l, b);
    let (mut c1, mut c2) = (c, b);
    let mut mass = prior.interval_mass(c1, c2)?;
    let mut iterations = 0;
    while (mass - phi1).abs() > opts.eps {
        if iterations == opts.max_iterations {
            return Err(Error::NonConvergence {
                what: "lower cut-point bisection",
                iterations,
                residual: (mass - phi1).abs(),
            });
        }
        iterations += 1;
        if mass > phi1 {
            hi = c2;
        } else {
            lo = c2;
        }
        c2 = 0.5 * (lo + hi);
        c1 = solve_c1(c2)?;
        mass = prior.interval_mass(c1, c2)?;
    }
    Ok(DoubtInterval {
        c1,
        c2,
        pinned: false,
        iterations,
        mass_residual: (mass - phi1).abs(),
        g_residual: Some(relative_gap(ln_g(c1)?, ln_g(c2)?)),
    })
}

/// `[c1_high, c2_high]` carrying `phi2` above `b`.
pub fn solve_upper_cutpoints(
    prior: &PriorSpec,
    ctx: &GFunctionContext,
    b: f64,
    phi2: f64,
    opts: &SolverOptions,
) -> Result<DoubtInterval> {
    check_bound(b)?;
    check_unit("phi2", phi2)?;
    let available = prior.sf(b)?;
    if phi2 > available {
        return Err(Error::Pk4Violated {
            side: DoubtSide::Upper,
            required: phi2,
            available,
        });
    }
    if phi2 == 0.0 {
        return Ok(degenerate(b));
    }
    let pinned = |iterations| -> Result<DoubtInterval> {
        let c2 = mass_to_right(prior, b, phi2)?;
        Ok(DoubtInterval {
            c1: b,
            c2,
            pinned: true,
            iterations,
            mass_residual: (prior.interval_mass(b, c2)? - phi2).abs(),
            g_residual: None,
        })
    };
    let x_u = ctx.x_u();
    if x_u <= b {
        return pinned(0);
    }
    let ln_g = |x: f64| ctx.ln_eval(GFunction::Upper, x);
    let solve_c2 =
        |c1: f64| ctx.solve_on_branch_ln(GFunction::Upper, ln_g(c1)?, Branch::Descending);
    let w = solve_c2(b)?;
    if prior.interval_mass(b, w)? < phi2 {
        return pinned(0);
    }
    let (mut lo, mut hi) = (b, x_u);
    let (mut c1, mut c2) = (b, w);
    let mut mass = prior.interval_mass(c1, c2)?;
    let mut iterations = 0;
    while (mass - phi2).abs() > opts.eps {
        if iterations == opts.max_iterations {
            return Err(Error::NonConvergence {
                what: "upper cut-point bisection",
                iterations,
                residual: (mass - phi2).abs(),
            });
        }
        iterations += 1;
        if mass > phi2 {
            lo = c1;
        } else {
            hi = c1;
        }
        c1 = 0.5 * (lo + hi);
        c2 = solve_c2(c1)?;
        mass = prior.interval_mass(c1, c2)?;
    }
    Ok(DoubtInterval {
        c1,
        c2,
        pinned: false,
        iterations,
        mass_residual: (mass - phi2).abs(),
        g_residual: Some(relative_gap(ln_g(c1)?, ln_g(c2)?)),
    })
}

/// All four cut-points for one problem.
pub fn solve_cutpoints(
    prior: &PriorSpec,
    ctx: &GFunctionContext,
    b: f64,
    phi1: f64,
    phi2: f64,
    opts: &SolverOptions,
) -> Result<CutPoints> {
    let lower = solve_lower_cutpoints(prior, ctx, b, phi1, opts)?;
    let upper = solve_upper_cutpoints(prior, ctx, b, phi2, opts)?;
    Ok(CutPoints {
        c1_low: lower.c1,
        c2_low: lower.c2,
        c1_high: upper.c1,
        c2_high: upper.c2,
        case: classify_case(ctx, b),
        lower,
        upper,
    })
}
