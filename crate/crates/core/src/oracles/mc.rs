use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::klotz::KlotzParams;

/// Chains per independent RNG stream.
const CHUNK: u64 = 1 << 15;

/// Smallest accepted number of simulated chains.
pub const MIN_RUNS: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub runs: u64,
}

impl McEstimate {
    /// `|estimate - value|` in standard errors of a binomial proportion
    /// with success probability `value`; 0 when both agree exactly.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.estimate - value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / (value * (1.0 - value) / self.runs as f64).sqrt()
        }
    }
}

/// Fraction of `runs` simulated chains of `n` demands with no failure.
///
/// Chunk `k` of the runs draws from stream `k` of a ChaCha generator seeded
/// with `seed`, so the result does not depend on the thread count.
pub fn mc_likelihood(p: &KlotzParams, n: u64, runs: u64, seed: u64) -> Result<McEstimate> {
    if runs < MIN_RUNS {
        return Err(Error::InvalidProblem(format!(
            "Monte Carlo needs at least {MIN_RUNS} runs, got {runs}"
        )));
    }
    let chunks = runs.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let size = CHUNK.min(runs - k * CHUNK);
            (0..size)
                .filter(|_| p.run_is_failure_free(n, &mut rng))
                .count() as u64
        })
        .sum();
    let estimate = hits as f64 / runs as f64;
    Ok(McEstimate {
        estimate,
        std_error: (estimate * (1.0 - estimate) / runs as f64).sqrt(),
        runs,
    })
}
