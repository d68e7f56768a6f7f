//! Intrinsic reward from the agent's own map and bump sensor.
//!
//! `total = alpha * (new known cells) + beta * (-1 if bumped else 0)`.
//! The coverage term counts raw map cells, not square meters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::OccupancyGrid;

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("coverage decreased from {prev} to {next} cells; maps passed out of order")]
    NegativeCoverage { prev: usize, next: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Weight per newly covered map cell.
    pub alpha: f64,
    /// Weight of the collision term.
    pub beta: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0005,
            beta: 0.006,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReward {
    /// Gain in known cells.
    pub cov_term: u64,
    /// `-1` on bump, else `0`.
    pub coll_term: i8,
    pub total: f64,
}

/// Reward from known-cell counts before and after the step.
pub fn reward_from_counts(
    prev_known: usize,
    next_known: usize,
    bump: bool,
    cfg: &RewardConfig,
) -> Result<StepReward, RewardError> {
    if next_known < prev_known {
        return Err(RewardError::NegativeCoverage {
            prev: prev_known,
            next: next_known,
        });
    }
    let cov_term = (next_known - prev_known) as u64;
    let coll_term: i8 = if bump { -1 } else { 0 };
    Ok(StepReward {
        cov_term,
        coll_term,
        total: cfg.alpha * cov_term as f64 + cfg.beta * f64::from(coll_term),
    })
}

pub fn step_reward(
    prev_map: &OccupancyGrid,
    next_map: &OccupancyGrid,
    bump: bool,
    cfg: &RewardConfig,
) -> Result<StepReward, RewardError> {
    reward_from_counts(prev_map.known_cells(), next_map.known_cells(), bump, cfg)
}
