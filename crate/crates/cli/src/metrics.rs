//! Solution-quality metrics.

use anyhow::{bail, Result};

/// Approximation ratio `y / y*`.
pub fn approximation_ratio(y: u64, y_star: u64) -> Result<f64> {
    if y_star == 0 {
        bail!("approximation ratio needs a positive optimum");
    }
    if y > y_star {
        bail!("incumbent {y} exceeds the optimum {y_star}; solver inconsistency");
    }
    Ok(y as f64 / y_star as f64)
}

/// Normalized progress from the greedy ratio (0) to the optimum (1).
///
/// When greedy is already optimal the gap is undefined; by convention the
/// flagged value 1 is reported.
pub fn optimality_gap(alpha: f64, alpha_greedy: f64) -> (f64, bool) {
    if alpha_greedy >= 1.0 {
        return (1.0, true);
    }
    ((alpha - alpha_greedy) / (1.0 - alpha_greedy), false)
}
