//! Experiment harness: closed-loop episodes, coverage curves, SPL and
//! downstream localization/navigation.

mod coverage;
mod downstream;
mod episode;
mod spl;

use thiserror::Error;

use crate::kinematics::{KinematicsError, Pose};
use crate::rewards::RewardError;
use crate::world::{Floorplan, WorldError};

pub use coverage::{
    aggregate, coverage_experiment, curves_to_csv, plan_jobs, run_jobs, CoverageCurve,
    CoverageReport, CoverageSpec, EpisodeJob,
};
pub use downstream::{
    collect_experience, descriptor, downstream_navigation, localization_errors, localize_goal,
    navigate, oracle_path_length, sample_tasks, success_curve, ExperienceLog, GoalLocalization,
    LocalizationErrors, LogEntry, NavConfig, NavTask,
};
pub use episode::{
    read_trace, run_episode, simulate, write_trace, EpisodeConfig, EpisodeOutcome, EpisodeTrace,
    TraceHeader, TraceStep,
};
pub use spl::{spl, SplRecord};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("SPL needs at least one record")]
    EmptyInput,
    #[error("experience log is empty")]
    EmptyLog,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Clearance required around sampled start and goal cells (meters).
pub const START_CLEARANCE: f64 = 0.15;

/// Random pose at the center of a cell with [`START_CLEARANCE`] to walls,
/// heading an integer number of degrees.
pub fn sample_pose<R: rand::Rng + ?Sized>(plan: &Floorplan, rng: &mut R) -> Pose {
    let cells = plan.cells_with_clearance(START_CLEARANCE);
    let cells = if cells.is_empty() {
        plan.traversable_cells().collect()
    } else {
        cells
    };
    let c = cells[rng.random_range(0..cells.len())];
    let p = c.center(plan.resolution());
    Pose::new(p.x, p.y, f64::from(rng.random_range(0..360u16)))
}
