//! Success weighted by (normalized inverse) path length.

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplRecord {
    /// Shortest-path length from start to goal, meters (`> 0`).
    pub shortest: f64,
    /// Length of the path actually traveled, meters.
    pub executed: f64,
    pub success: bool,
}

/// `SPL = (1/N) Σ S_i · ℓ_i / max(p_i, ℓ_i)`.
pub fn spl(records: &[SplRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let sum = records
        .iter()
        .filter(|r| r.success)
        .fold(0.0, |acc, r| acc + r.shortest / r.executed.max(r.shortest));
    Ok(sum / records.len() as f64)
}
