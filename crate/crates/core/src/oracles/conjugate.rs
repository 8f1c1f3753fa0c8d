use crate::error::{check_unit, Result};
use crate::prior::BetaParams;
use crate::special::beta_inc;

/// `P(X <= b | n failure-free i.i.d. demands)` for a `Beta(α, β)` prior:
/// the posterior is `Beta(α, β + n)`, so this is `I_b(α, β + n)`.
pub fn beta_conjugate_posterior(params: BetaParams, b: f64, n: u64) -> Result<f64> {
    check_unit("b", b)?;
    Ok(beta_inc(params.alpha, params.beta + n as f64, b).0)
}
