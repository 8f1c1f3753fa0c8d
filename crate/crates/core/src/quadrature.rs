//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature of non-negative
//! integrands supplied in log space.
//!
//! Each panel is evaluated relative to its own largest log-value, so an
//! integrand like `(1-x)^n f(x)` with `n = 1e7` (values near `e^-1000`) is
//! integrated to full relative precision instead of underflowing to zero.
//! Panel totals are accumulated against a shared reference scale with
//! compensated summation. Nodes are interior to each panel, so endpoint
//! singularities of the density are never sampled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances for [`integrate_ln`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Target relative error of the whole integral.
    pub rel_tol: f64,
    /// Hard cap on the number of live panels.
    pub max_panels: usize,
    /// Uniform panels each split segment starts with.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_panels: 1 << 20,
            initial_panels: 8,
        }
    }
}

/// An integral held as `ln(value)` with a log-scale absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral {
    pub ln_value: f64,
    pub ln_error: f64,
    pub panels: usize,
}

impl LogIntegral {
    pub const ZERO: LogIntegral = LogIntegral {
        ln_value: f64::NEG_INFINITY,
        ln_error: f64::NEG_INFINITY,
        panels: 0,
    };

    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    /// Relative error estimate; zero for an exactly-zero integral.
    pub fn rel_error(&self) -> f64 {
        if self.ln_value == f64::NEG_INFINITY {
            0.0
        } else {
            (self.ln_error - self.ln_value).exp()
        }
    }

    /// Sum of two integrals over disjoint ranges.
    pub fn add(&self, other: &LogIntegral) -> LogIntegral {
        LogIntegral {
            ln_value: log_add(self.ln_value, other.ln_value),
            ln_error: log_add(self.ln_error, other.ln_error),
            panels: self.panels + other.panels,
        }
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}` with compensated summation.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_infinite() {
        return max;
    }
    let mut acc = KahanSum::default();
    for v in values {
        acc.add((v - max).exp());
    }
    max + acc.total().ln()
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    ln_value: f64,
    ln_error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ln_error.total_cmp(&other.ln_error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gauss_kronrod<F: Fn(f64) -> f64>(ln_f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut lv = [f64::NEG_INFINITY; 21];
    lv[0] = ln_f(center);
    for j in 0..10 {
        let dx = half * XGK[j];
        lv[1 + 2 * j] = ln_f(center - dx);
        lv[2 + 2 * j] = ln_f(center + dx);
    }
    for v in lv.iter_mut() {
        debug_assert!(!v.is_nan(), "NaN in log integrand on [{a}, {b}]");
        if v.is_nan() {
            *v = f64::NEG_INFINITY;
        }
    }
    let shift = lv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Panel {
            a,
            b,
            ln_value: f64::NEG_INFINITY,
            ln_error: f64::NEG_INFINITY,
        };
    }
    let f = lv.map(|v| (v - shift).exp());

    let fc = f[0];
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k;
    for j in 0..10 {
        let pair = f[1 + 2 * j] + f[2 + 2 * j];
        res_k += WGK[j] * pair;
        res_abs += WGK[j] * pair;
        if j % 2 == 1 {
            res_g += WG[j / 2] * pair;
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((f[1 + 2 * j] - mean).abs() + (f[2 + 2 * j] - mean).abs());
    }
    let err = rescale_error((res_k - res_g) * half, res_abs * half, res_asc * half);
    let value = res_k * half;
    Panel {
        a,
        b,
        ln_value: value.ln() + shift,
        ln_error: err.ln() + shift,
    }
}

/// Integrate `exp(ln_f)` over `[a, b]`, starting from panels split at every
/// point of `splits` that lies strictly inside the interval.
pub fn integrate_ln<F: Fn(f64) -> f64>(
    ln_f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    opts: &QuadOptions,
) -> Result<LogIntegral> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::Domain {
            what: "integration bounds a <= b, a",
            value: a,
            domain: "(-inf, b]",
        });
    }
    if a == b {
        return Ok(LogIntegral::ZERO);
    }

    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(splits.iter().copied().filter(|&s| s > a && s < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        let k = opts.initial_panels.max(1);
        let step = (w[1] - w[0]) / k as f64;
        for i in 0..k {
            let lo = w[0] + step * i as f64;
            let hi = if i + 1 == k { w[1] } else { lo + step };
            if hi > lo {
                heap.push(gauss_kronrod(&ln_f, lo, hi));
            }
        }
    }
    let mut frozen: Vec<Panel> = Vec::new();

    let rescan = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| -> (f64, f64, f64) {
        let scale = heap
            .iter()
            .chain(frozen.iter())
            .map(|p| p.ln_value)
            .fold(f64::NEG_INFINITY, f64::max);
        if scale == f64::NEG_INFINITY {
            return (scale, 0.0, 0.0);
        }
        let mut v = KahanSum::default();
        let mut e = KahanSum::default();
        for p in heap.iter().chain(frozen.iter()) {
            v.add((p.ln_value - scale).exp());
            e.add((p.ln_error - scale).exp());
        }
        (scale, v.total(), e.total())
    };

    let (mut scale, mut sum_v, mut sum_e) = rescan(&heap, &frozen);
    let mut iterations = 0usize;
    loop {
        if scale == f64::NEG_INFINITY || sum_e <= opts.rel_tol * sum_v {
            // confirm with a fresh, compensated pass before accepting
            let (s, v, e) = rescan(&heap, &frozen);
            scale = s;
            sum_v = v;
            sum_e = e;
            if scale == f64::NEG_INFINITY || sum_e <= opts.rel_tol * sum_v {
                break;
            }
        }
        if heap.len() + frozen.len() >= opts.max_panels {
            return Err(Error::Quadrature {
                panels: heap.len() + frozen.len(),
                rel_error: sum_e / sum_v,
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::Quadrature {
                panels: frozen.len(),
                rel_error: sum_e / sum_v,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            frozen.push(worst);
            continue;
        }
        let left = gauss_kronrod(&ln_f, worst.a, mid);
        let right = gauss_kronrod(&ln_f, mid, worst.b);
        sum_v -= (worst.ln_value - scale).exp();
        sum_e -= (worst.ln_error - scale).exp();
        let rebase = left.ln_value - scale > 600.0 || right.ln_value - scale > 600.0;
        heap.push(left);
        heap.push(right);
        iterations += 1;
        if rebase || iterations.is_multiple_of(512) {
            (scale, sum_v, sum_e) = rescan(&heap, &frozen);
        } else {
            for p in [left, right] {
                sum_v += (p.ln_value - scale).exp();
                sum_e += (p.ln_error - scale).exp();
            }
        }
    }

    Ok(LogIntegral {
        ln_value: if sum_v > 0.0 {
            scale + sum_v.ln()
        } else {
            f64::NEG_INFINITY
        },
        ln_error: if sum_e > 0.0 {
            scale + sum_e.ln()
        } else {
            f64::NEG_INFINITY
        },
        panels: heap.len() + frozen.len(),
    })
}
