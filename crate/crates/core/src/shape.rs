//! Likelihood-difference functions
//!
//! ```text
//! g_l(x) = L(x, x; n) - L(x, 0; n)   on [0, 1/2]
//! g_u(x) = L(x, 1; n) - L(x, x; n)   on [0, 1]
//! ```
//!
//! Both are unimodal. Their maximizers `x_l` and `x_u` decide where the
//! worst-case prior puts its doubt mass, and each monotone branch can be
//! inverted by bisection. Evaluation goes through log space because both
//! terms of `g_l` underflow at large `n` long before their difference does.

use crate::error::{Error, Result};

/// Which likelihood-difference function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GFunction {
    Lower,
    Upper,
}

/// A monotone piece of a unimodal `g`: left of the maximizer or right of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Ascending,
    Descending,
}

impl Branch {
    fn name(self, g: GFunction) -> &'static str {
        match (g, self) {
            (GFunction::Lower, Branch::Ascending) => "ascending g_l",
            (GFunction::Lower, Branch::Descending) => "descending g_l",
            (GFunction::Upper, Branch::Ascending) => "ascending g_u",
            (GFunction::Upper, Branch::Descending) => "descending g_u",
        }
    }
}

/// `n` together with the two maximizers, computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFunctionContext {
    n: u64,
    x_l: f64,
    x_u: f64,
}

impl GFunctionContext {
    pub fn new(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain {
                what: "n",
                value: n as f64,
                domain: "n >= 2",
            });
        }
        Ok(Self {
            n,
            x_l: argmax_g_lower(n),
            x_u: argmax_g_upper(n),
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Maximizer of `g_l` on `[0, 1/2]`.
    pub fn x_l(&self) -> f64 {
        self.x_l
    }

    /// Maximizer of `g_u` on `[0, 1]`.
    pub fn x_u(&self) -> f64 {
        self.x_u
    }

    pub fn argmax(&self, g: GFunction) -> f64 {
        match g {
            GFunction::Lower => self.x_l,
            GFunction::Upper => self.x_u,
        }
    }

    pub fn domain(&self, g: GFunction) -> (f64, f64) {
        match g {
            GFunction::Lower => (0.0, 0.5),
            GFunction::Upper => (0.0, 1.0),
        }
    }

    /// Endpoints of a monotone branch.
    pub fn branch_interval(&self, g: GFunction, branch: Branch) -> (f64, f64) {
        let (lo, hi) = self.domain(g);
        let apex = self.argmax(g);
        match branch {
            Branch::Ascending => (lo, apex),
            Branch::Descending => (apex, hi),
        }
    }

    pub fn g_lower(&self, x: f64) -> Result<f64> {
        self.check(GFunction::Lower, x)?;
        Ok(g_lower_unchecked(self.n, x))
    }

    pub fn g_upper(&self, x: f64) -> Result<f64> {
        self.check(GFunction::Upper, x)?;
        Ok(g_upper_unchecked(self.n, x))
    }

    pub fn eval(&self, g: GFunction, x: f64) -> Result<f64> {
        match g {
            GFunction::Lower => self.g_lower(x),
            GFunction::Upper => self.g_upper(x),
        }
    }

    /// `ln g(x)`; `-inf` where `g` vanishes.
    pub fn ln_eval(&self, g: GFunction, x: f64) -> Result<f64> {
        self.check(g, x)?;
        Ok(self.ln_unchecked(g, x))
    }

    fn ln_unchecked(&self, g: GFunction, x: f64) -> f64 {
        match g {
            GFunction::Lower => ln_g_lower(self.n, x),
            GFunction::Upper => ln_g_upper(self.n, x),
        }
    }

    fn check(&self, g: GFunction, x: f64) -> Result<()> {
        let (lo, hi) = self.domain(g);
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "x",
                value: x,
                domain: match g {
                    GFunction::Lower => "[0, 1/2]",
                    GFunction::Upper => "[0, 1]",
                },
            })
        }
    }

    /// The unique `x` on `branch` with `g(x) = target`.
    pub fn solve_on_branch(&self, g: GFunction, target: f64, branch: Branch) -> Result<f64> {
        if target.is_nan() || target < 0.0 {
            let (lo, hi) = self.branch_interval(g, branch);
            return Err(Error::TargetOutOfRange {
                branch: branch.name(g),
                target,
                lo: self.eval(g, lo)?.min(self.eval(g, hi)?),
                hi: self.eval(g, self.argmax(g))?,
            });
        }
        self.solve_on_branch_ln(g, target.ln(), branch)
    }

    /// As [`solve_on_branch`](Self::solve_on_branch) with the target given as
    /// `ln g`, so targets below the double-precision underflow threshold
    /// still have a well-defined pre-image.
    pub fn solve_on_branch_ln(&self, g: GFunction, ln_target: f64, branch: Branch) -> Result<f64> {
        let (a, b) = self.branch_interval(g, branch);
        // keep `lo` on the low-value side and `hi` on the apex side
        let (mut lo, mut hi) = match branch {
            Branch::Ascending => (a, b),
            Branch::Descending => (b, a),
        };
        let f_lo = self.ln_unchecked(g, lo);
        let f_hi = self.ln_unchecked(g, hi);
        let slack = 1e-12 * f_hi.abs().max(1.0);
        if ln_target.is_nan() || ln_target > f_hi + slack || ln_target < f_lo - slack {
            return Err(Error::TargetOutOfRange {
                branch: branch.name(g),
                target: ln_target.exp(),
                lo: f_lo.exp(),
                hi: f_hi.exp(),
            });
        }
        if ln_target >= f_hi {
            return Ok(hi);
        }
        if ln_target <= f_lo {
            return Ok(lo);
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.ln_unchecked(g, mid) < ln_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e_lo = (self.ln_unchecked(g, lo) - ln_target).abs();
        let e_hi = (self.ln_unchecked(g, hi) - ln_target).abs();
        Ok(if e_lo < e_hi { lo } else { hi })
    }
}

fn g_lower_unchecked(n: u64, x: f64) -> f64 {
    let r = x / (1.0 - x);
    let head = (n as f64 * (-x).ln_1p()).exp();
    head * -((n - 1) as f64 * (-r * r).ln_1p()).exp_m1()
}

fn g_upper_unchecked(n: u64, x: f64) -> f64 {
    (1.0 - x) * -((n - 1) as f64 * (-x).ln_1p()).exp_m1()
}

fn ln_g_lower(n: u64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let r = x / (1.0 - x);
    let nm1 = (n - 1) as f64;
    let tail = if r < 1e-20 {
        // r^2 may underflow; -expm1(-(n-1) r^2) = (n-1) r^2 (1 - ...)
        let ln_small = nm1.ln() + 2.0 * r.ln();
        ln_small - 0.5 * ln_small.exp()
    } else {
        (-(nm1 * (-r * r).ln_1p()).exp_m1()).ln()
    };
    n as f64 * (-x).ln_1p() + tail
}

fn ln_g_upper(n: u64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return f64::NEG_INFINITY;
    }
    (-x).ln_1p() + (-((n - 1) as f64 * (-x).ln_1p()).exp_m1()).ln()
}

/// `g_l(x)` for `n >= 2`, `x` in `[0, 1/2]`.
pub fn g_lower(n: u64, x: f64) -> Result<f64> {
    GFunctionContext::new(n)?.g_lower(x)
}

/// `g_u(x) = (1 - x) - (1 - x)^n` for `n >= 2`, `x` in `[0, 1]`.
pub fn g_upper(n: u64, x: f64) -> Result<f64> {
    GFunctionContext::new(n)?.g_upper(x)
}

/// `x_u = 1 - n^(-1/(n-1))`.
pub fn argmax_g_upper(n: u64) -> f64 {
    assert!(n >= 2);
    -(-(n as f64).ln() / (n - 1) as f64).exp_m1()
}

// Sign of g_l'(x) on (0, 1/2): 2(n-1)x + (ρ - 1)(n - 2x),
// with ρ = ((1 - 2x) / (1 - x)^2)^(n-1).
fn g_lower_slope_sign(n: u64, x: f64) -> f64 {
    let r = x / (1.0 - x);
    let nm1 = (n - 1) as f64;
    let rho_m1 = (nm1 * (-r * r).ln_1p()).exp_m1();
    2.0 * nm1 * x + rho_m1 * (n as f64 - 2.0 * x)
}

const GOLDEN_ITERATIONS: usize = 80;

/// Maximizer of `g_l` on `[0, 1/2]`: golden-section search on `ln g_l`,
/// then bisection on the sign of the derivative. Returns `1/2` at `n = 2`.
pub fn argmax_g_lower(n: u64) -> f64 {
    assert!(n >= 2);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |x: f64| ln_g_lower(n, x);
    let (mut a, mut d) = (0.0f64, 0.5f64);
    let mut b = d - inv_phi * (d - a);
    let mut c = a + inv_phi * (d - a);
    let (mut fb, mut fc) = (f(b), f(c));
    for _ in 0..GOLDEN_ITERATIONS {
        if d - a <= 1e-14 {
            break;
        }
        if fb < fc {
            a = b;
            b = c;
            fb = fc;
            c = a + inv_phi * (d - a);
            fc = f(c);
        } else {
            d = c;
            c = b;
            fc = fb;
            b = d - inv_phi * (d - a);
            fb = f(b);
        }
    }
    let mut lo = if a > 0.0 && g_lower_slope_sign(n, a) > 0.0 {
        a
    } else {
        0.0
    };
    let mut hi = if d < 0.5 && g_lower_slope_sign(n, d) <= 0.0 {
        d
    } else {
        0.5
    };
    loop {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g_lower_slope_sign(n, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi == 0.5 && g_lower_slope_sign(n, lo) > 0.0 {
        0.5
    } else if f(lo) >= f(hi) {
        lo
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const NS: [u64; 5] = [2, 5, 10, 100, 10_000];

    fn sign_changes(values: &[f64]) -> usize {
        let mut last = 0i8;
        let mut changes = 0;
        for w in values.windows(2) {
            let d = w[1] - w[0];
            let s = if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    changes += 1;
                }
                last = s;
            }
        }
        changes
    }

    #[test]
    fn g_lower_examples() {
        let ctx = GFunctionContext::new(10).unwrap();
        assert_eq!(ctx.g_lower(0.0).unwrap(), 0.0);
        assert_relative_eq!(
            ctx.g_lower(0.5).unwrap(),
            2f64.powi(-10),
            max_relative = 1e-14
        );
        let two = GFunctionContext::new(2).unwrap();
        assert_relative_eq!(two.g_lower(0.25).unwrap(), 0.0625, max_relative = 1e-14);
        for &x in &[0.01, 0.1, 0.3, 0.45] {
            assert_relative_eq!(two.g_lower(x).unwrap(), x * x, max_relative = 1e-13);
        }
        assert!(ctx.g_lower(0.6).is_err());
        assert!(ctx.g_lower(-0.1).is_err());
    }

    #[test]
    fn g_lower_matches_direct_formula() {
        for &n in &[3u64, 7, 20] {
            let ctx = GFunctionContext::new(n).unwrap();
            for &x in &[0.05f64, 0.2, 0.4] {
                let direct = (1.0 - x).powi(n as i32)
                    - (1.0 - 2.0 * x).powi(n as i32 - 1) / (1.0 - x).powi(n as i32 - 2);
                assert_relative_eq!(ctx.g_lower(x).unwrap(), direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn g_upper_examples() {
        let ctx = GFunctionContext::new(2).unwrap();
        assert_eq!(ctx.g_upper(0.0).unwrap(), 0.0);
        assert_eq!(ctx.g_upper(1.0).unwrap(), 0.0);
        assert_relative_eq!(ctx.g_upper(0.5).unwrap(), 0.25, max_relative = 1e-15);
        let ten = GFunctionContext::new(10).unwrap();
        let xu = ten.x_u();
        assert_relative_eq!(xu, 0.22574, epsilon = 1e-5);
        assert_relative_eq!(
            ten.g_upper(xu).unwrap(),
            (1.0 - xu) * (1.0 - 0.1),
            max_relative = 1e-13
        );
        assert!(ten.g_upper(1.1).is_err());
    }

    #[test]
    fn n_below_two_rejected() {
        assert!(GFunctionContext::new(1).is_err());
        assert!(GFunctionContext::new(0).is_err());
    }

    #[test]
    fn argmax_upper_closed_form() {
        assert_relative_eq!(argmax_g_upper(2), 0.5, max_relative = 1e-15);
        assert_relative_eq!(
            argmax_g_upper(10),
            1.0 - 10f64.powf(-1.0 / 9.0),
            max_relative = 1e-14
        );
        let mut prev = 1.0;
        for k in 1..=7 {
            let x = argmax_g_upper(10u64.pow(k));
            assert!(x < prev);
            prev = x;
        }
    }

    #[test]
    fn argmax_lower_boundary_at_two() {
        assert_eq!(argmax_g_lower(2), 0.5);
    }

    #[test]
    fn argmax_lower_is_local_max() {
        for &n in &[3u64, 10, 100, 1_000, 10_000, 1_000_000, 10_000_000] {
            let ctx = GFunctionContext::new(n).unwrap();
            let xl = ctx.x_l();
            assert!(xl > 0.0 && xl < 0.5, "n={n} x_l={xl}");
            let h = 1e-6 * xl.max(1e-6);
            let peak = ctx.ln_eval(GFunction::Lower, xl).unwrap();
            assert!(ctx.ln_eval(GFunction::Lower, xl - h).unwrap() < peak);
            assert!(ctx.ln_eval(GFunction::Lower, xl + h).unwrap() < peak);
            assert!(g_lower_slope_sign(n, xl * (1.0 - 1e-9)) > 0.0);
            assert!(g_lower_slope_sign(n, xl * (1.0 + 1e-9)) < 0.0);
        }
        let ten = GFunctionContext::new(10).unwrap();
        let xl = ten.x_l();
        let peak = ten.g_lower(xl).unwrap();
        assert!(ten.g_lower(xl - 1e-6).unwrap() < peak);
        assert!(ten.g_lower(xl + 1e-6).unwrap() < peak);
    }

    #[test]
    fn argmax_lower_decreasing_in_n() {
        let xs: Vec<f64> = [10u64, 100, 1_000, 10_000]
            .iter()
            .map(|&n| argmax_g_lower(n))
            .collect();
        for w in xs.windows(2) {
            assert!(w[1] < w[0], "{xs:?}");
        }
    }

    #[test]
    fn argmax_lower_matches_grid() {
        for &n in &NS[1..] {
            let ctx = GFunctionContext::new(n).unwrap();
            let grid = 10_000;
            let h = 0.5 / grid as f64;
            let best = (0..=grid)
                .map(|i| i as f64 * h)
                .max_by(|a, b| {
                    ctx.g_lower(*a)
                        .unwrap()
                        .total_cmp(&ctx.g_lower(*b).unwrap())
                })
                .unwrap();
            assert!((best - ctx.x_l()).abs() <= h, "n={n}");
        }
    }

    #[test]
    fn argmax_upper_matches_grid() {
        for &n in &NS {
            let ctx = GFunctionContext::new(n).unwrap();
            let grid = 10_000;
            let h = 1.0 / grid as f64;
            let best = (0..=grid)
                .map(|i| i as f64 * h)
                .max_by(|a, b| {
                    ctx.g_upper(*a)
                        .unwrap()
                        .total_cmp(&ctx.g_upper(*b).unwrap())
                })
                .unwrap();
            assert!((best - ctx.x_u()).abs() <= h, "n={n}");
        }
    }

    #[test]
    fn unimodality_certificate() {
        let grid = 10_000;
        for &n in &NS {
            let ctx = GFunctionContext::new(n).unwrap();
            let lower: Vec<f64> = (0..=grid)
                .map(|i| ctx.g_lower(0.5 * i as f64 / grid as f64).unwrap())
                .collect();
            let upper: Vec<f64> = (0..=grid)
                .map(|i| ctx.g_upper(i as f64 / grid as f64).unwrap())
                .collect();
            // at n = 2, g_l = x^2 rises all the way to the boundary
            let expected_lower = if n == 2 { 0 } else { 1 };
            assert_eq!(sign_changes(&lower), expected_lower, "g_l n={n}");
            assert_eq!(sign_changes(&upper), 1, "g_u n={n}");
            assert!(lower.iter().all(|&v| v >= 0.0));
            assert!(upper.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn solve_upper_quadratic_roots() {
        let ctx = GFunctionContext::new(2).unwrap();
        let up = ctx
            .solve_on_branch(GFunction::Upper, 0.1875, Branch::Ascending)
            .unwrap();
        let down = ctx
            .solve_on_branch(GFunction::Upper, 0.1875, Branch::Descending)
            .unwrap();
        assert_relative_eq!(up, 0.25, epsilon = 1e-14);
        assert_relative_eq!(down, 0.75, epsilon = 1e-14);
    }

    #[test]
    fn solve_at_apex_returns_argmax() {
        for &n in &NS {
            let ctx = GFunctionContext::new(n).unwrap();
            for g in [GFunction::Lower, GFunction::Upper] {
                let apex = ctx.argmax(g);
                let top = ctx.eval(g, apex).unwrap();
                for br in [Branch::Ascending, Branch::Descending] {
                    let x = ctx.solve_on_branch(g, top, br).unwrap();
                    assert!((ctx.eval(g, x).unwrap() - top).abs() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn solve_out_of_range() {
        let ctx = GFunctionContext::new(10).unwrap();
        let err = ctx
            .solve_on_branch(GFunction::Upper, 0.9, Branch::Ascending)
            .unwrap_err();
        assert!(matches!(err, Error::TargetOutOfRange { .. }));
        assert!(err.to_string().contains("ascending g_u"));
        assert!(ctx
            .solve_on_branch(GFunction::Lower, -1.0, Branch::Descending)
            .is_err());
    }

    #[test]
    fn solve_below_underflow() {
        // g_l(1e-4) at n = 1e7 is about e^-1002, far below the smallest double
        let ctx = GFunctionContext::new(10_000_000).unwrap();
        let t = ctx.ln_eval(GFunction::Lower, 1e-4).unwrap();
        assert!(t.is_finite() && t.exp() == 0.0);
        let x = ctx
            .solve_on_branch_ln(GFunction::Lower, t, Branch::Ascending)
            .unwrap();
        assert!(x > 0.0 && x < ctx.x_l());
        let back = ctx.ln_eval(GFunction::Lower, x).unwrap();
        assert!((back - t).abs() <= 1e-12 * t.abs());
    }

    proptest! {
        #[test]
        fn solve_then_reevaluate(
            n in prop::sample::select(vec![2u64, 5, 10, 100, 10_000]),
            frac in 0.0f64..1.0,
            lower in any::<bool>(),
            ascending in any::<bool>(),
        ) {
            let ctx = GFunctionContext::new(n).unwrap();
            let g = if lower { GFunction::Lower } else { GFunction::Upper };
            let br = if ascending { Branch::Ascending } else { Branch::Descending };
            let (a, b) = ctx.branch_interval(g, br);
            let (ga, gb) = (ctx.eval(g, a).unwrap(), ctx.eval(g, b).unwrap());
            let t = ga.min(gb) + frac * (ga - gb).abs();
            let x = ctx.solve_on_branch(g, t, br).unwrap();
            prop_assert!(x >= a && x <= b);
            prop_assert!((ctx.eval(g, x).unwrap() - t).abs() <= 1e-12);
        }

        #[test]
        fn g_functions_non_negative(n in 2u64..5_000, x in 0.0f64..=1.0) {
            let ctx = GFunctionContext::new(n).unwrap();
            prop_assert!(ctx.g_upper(x).unwrap() >= 0.0);
            prop_assert!(ctx.g_lower(0.5 * x).unwrap() >= 0.0);
        }
    }
}
