//! Brute-force infimum over discrete joint priors.
//!
//! `[0, 1]` is cut into strips at `k / N` and at `b`. Each strip's prior mass
//! sits at its midpoint. Doubt mass is moved off the diagonal onto λ = 0
//! (below `b`) or λ = 1 (above `b`), and the resulting joint prior is
//! evaluated exactly. The two sides are independent: lower doubt only
//! changes the likelihood mass below `b`, upper doubt only the mass above.

use crate::error::{DoubtSide, Error, Result};
use crate::klotz::KlotzParams;
use crate::oracles::joint::{Atom, DiscreteJointPrior};
use crate::prior::PriorSpec;

/// Strip layout of the grid oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    /// Number of uniform strips before `b` is inserted as an extra edge.
    pub x_points: usize,
}

impl GridSpec {
    pub fn new(x_points: usize) -> Result<Self> {
        if x_points < 2 {
            return Err(Error::InvalidProblem(format!(
                "grid needs at least 2 strips, got {x_points}"
            )));
        }
        Ok(Self { x_points })
    }
}

/// Where a strip's doubt mass goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Diagonal,
    LambdaZero,
    LambdaOne,
}

#[derive(Debug, Clone, Copy)]
struct Strip {
    x: f64,
    mass: f64,
    /// likelihood on the diagonal
    iid: f64,
    /// likelihood on the doubt edge
    edge: f64,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub confidence: f64,
    pub witness: DiscreteJointPrior,
    /// Doubt mass per strip below `b`, in strip order.
    pub lower_doubt: Vec<f64>,
    /// Doubt mass per strip above `b`, in strip order.
    pub upper_doubt: Vec<f64>,
    pub lower_x: Vec<f64>,
    pub upper_x: Vec<f64>,
}

fn strips(prior: &PriorSpec, b: f64, n: u64, grid: &GridSpec) -> Result<(Vec<Strip>, Vec<Strip>)> {
    let mut edges: Vec<f64> = (0..=grid.x_points)
        .map(|k| k as f64 / grid.x_points as f64)
        .collect();
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let (mut below, mut above) = (Vec::new(), Vec::new());
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mass = prior.interval_mass(lo, hi)?;
        let x = 0.5 * (lo + hi);
        let iid = KlotzParams::independent(x)?.likelihood_ff(n);
        if hi <= b {
            let edge = KlotzParams::new(x, 0.0)?.likelihood_ff(n);
            below.push(Strip { x, mass, iid, edge });
        } else {
            let edge = KlotzParams::new(x, 1.0)?.likelihood_ff(n);
            above.push(Strip { x, mass, iid, edge });
        }
    }
    Ok((below, above))
}

// Best contiguous run of strips carrying `phi`, with at most one partially
// filled strip at the far end of the run, scored by Σ d_i (edge_i - iid_i).
// `sign` = -1 minimizes, +1 maximizes.
fn best_contiguous(strips: &[Strip], phi: f64, sign: f64) -> Vec<f64> {
    let k = strips.len();
    let mut best = vec![0.0; k];
    if phi <= 0.0 {
        return best;
    }
    let mut best_score = f64::NEG_INFINITY;
    let gain = |i: usize| sign * (strips[i].edge - strips[i].iid);
    for start in 0..k {
        for forward in [true, false] {
            let mut d = vec![0.0; k];
            let mut left = phi;
            let mut score = 0.0;
            let mut i = start as isize;
            while left > 0.0 && i >= 0 && (i as usize) < k {
                let j = i as usize;
                let take = strips[j].mass.min(left);
                d[j] = take;
                score += take * gain(j);
                left -= take;
                i += if forward { 1 } else { -1 };
            }
            if left > 1e-15 * phi.max(1.0) {
                continue;
            }
            if score > best_score {
                best_score = score;
                best = d;
            }
        }
    }
    best
}

// Every vertex of {0 <= d_i <= m_i, Σ d_i = phi}: a subset filled completely
// plus at most one partial strip.
fn best_exhaustive(strips: &[Strip], phi: f64, sign: f64) -> Vec<f64> {
    let k = strips.len();
    let mut best = vec![0.0; k];
    if phi <= 0.0 {
        return best;
    }
    let mut best_score = f64::NEG_INFINITY;
    let gain: Vec<f64> = strips.iter().map(|s| sign * (s.edge - s.iid)).collect();
    for set in 0u64..(1u64 << k) {
        let mut mass = 0.0;
        let mut score = 0.0;
        for (i, s) in strips.iter().enumerate() {
            if set >> i & 1 == 1 {
                mass += s.mass;
                score += s.mass * gain[i];
            }
        }
        if mass > phi * (1.0 + 1e-15) {
            continue;
        }
        let rest = (phi - mass).max(0.0);
        let candidates: Vec<Option<usize>> = if rest <= 1e-15 * phi {
            vec![None]
        } else {
            (0..k)
                .filter(|&p| set >> p & 1 == 0 && strips[p].mass >= rest)
                .map(Some)
                .collect()
        };
        for p in candidates {
            let total = score + p.map_or(0.0, |p| rest * gain[p]);
            if total > best_score {
                best_score = total;
                best = (0..k)
                    .map(|i| {
                        if set >> i & 1 == 1 {
                            strips[i].mass
                        } else if Some(i) == p {
                            rest
                        } else {
                            0.0
                        }
                    })
                    .collect();
            }
        }
    }
    best
}

fn assemble(
    below: &[Strip],
    above: &[Strip],
    lower: Vec<f64>,
    upper: Vec<f64>,
    b: f64,
    n: u64,
) -> Result<GridResult> {
    let mut atoms = Vec::with_capacity(2 * (below.len() + above.len()));
    for (side, doubt, lambda) in [(below, &lower, 0.0), (above, &upper, 1.0)] {
        for (s, &d) in side.iter().zip(doubt.iter()) {
            atoms.push(Atom {
                x: s.x,
                lambda: s.x,
                mass: (s.mass - d).max(0.0),
            });
            atoms.push(Atom {
                x: s.x,
                lambda,
                mass: d,
            });
        }
    }
    let witness = DiscreteJointPrior::normalized(atoms)?;
    let confidence = witness.posterior(b, n)?;
    Ok(GridResult {
        confidence,
        witness,
        lower_doubt: lower,
        upper_doubt: upper,
        lower_x: below.iter().map(|s| s.x).collect(),
        upper_x: above.iter().map(|s| s.x).collect(),
    })
}

fn check_feasible(below: &[Strip], above: &[Strip], phi1: f64, phi2: f64) -> Result<()> {
    let m_below: f64 = below.iter().map(|s| s.mass).sum();
    let m_above: f64 = above.iter().map(|s| s.mass).sum();
    if phi1 > m_below {
        return Err(Error::Pk4Violated {
            side: DoubtSide::Lower,
            required: phi1,
            available: m_below,
        });
    }
    if phi2 > m_above {
        return Err(Error::Pk4Violated {
            side: DoubtSide::Upper,
            required: phi2,
            available: m_above,
        });
    }
    Ok(())
}

/// Smallest posterior confidence over contiguous doubt placements.
pub fn grid_infimum(
    prior: &PriorSpec,
    b: f64,
    n: u64,
    phi1: f64,
    phi2: f64,
    grid: &GridSpec,
) -> Result<GridResult> {
    let (below, above) = strips(prior, b, n, grid)?;
    check_feasible(&below, &above, phi1, phi2)?;
    let lower = best_contiguous(&below, phi1, -1.0);
    let upper = best_contiguous(&above, phi2, 1.0);
    assemble(&below, &above, lower, upper, b, n)
}

/// As [`grid_infimum`] but over every vertex of the placement polytope,
/// contiguous or not. Exponential in the strip count; for at most 24 strips
/// per side.
pub fn grid_infimum_exhaustive(
    prior: &PriorSpec,
    b: f64,
    n: u64,
    phi1: f64,
    phi2: f64,
    grid: &GridSpec,
) -> Result<GridResult> {
    let (below, above) = strips(prior, b, n, grid)?;
    if below.len() > 24 || above.len() > 24 {
        return Err(Error::InvalidProblem(format!(
            "exhaustive grid search is limited to 24 strips per side, got {} and {}",
            below.len(),
            above.len()
        )));
    }
    check_feasible(&below, &above, phi1, phi2)?;
    let lower = best_exhaustive(&below, phi1, -1.0);
    let upper = best_exhaustive(&above, phi2, 1.0);
    assemble(&below, &above, lower, upper, b, n)
}
