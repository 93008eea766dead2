use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Schatten `α`-norm `(Σ s_i^α)^{1/α}`; `f64::INFINITY` gives the operator norm.
pub fn schatten_norm(x: &CMat, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidParameter(format!("Schatten index {alpha} must be >= 1")));
    }
    let s = linalg::singular_values(x);
    if s.is_empty() {
        return Ok(0.0);
    }
    if alpha.is_infinite() {
        return Ok(s[0]);
    }
    // scale by the largest singular value to avoid overflow at large alpha
    let smax = s[0];
    if smax == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = s.iter().map(|v| (v / smax).powf(alpha)).sum();
    Ok(smax * sum.powf(1.0 / alpha))
}

/// Operator norm of a PSD matrix (largest eigenvalue).
pub fn max_eigenvalue(x: &CMat) -> f64 {
    linalg::eigvalsh(x).first().copied().unwrap_or(0.0)
}
