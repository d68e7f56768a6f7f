//! Closed-loop episodes and their JSON-lines traces.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::kinematics::{step, Action, NoiseConfig, Pose};
use crate::mapping::{coverage, integrate, OccupancyGrid};
use crate::policies::{Observation, PolicyKind};
use crate::rewards::{reward_from_counts, RewardConfig};
use crate::seed::{derive_seed, rng_for};
use crate::sensor::{render_scan, SensorConfig};
use crate::world::{Floorplan, WorldMode};

use super::EvalError;

const NOISE_STREAM: u64 = 1;
const POLICY_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub policy: PolicyKind,
    pub steps: usize,
    pub eta: f64,
    pub seed: u64,
    pub mode: WorldMode,
    pub start: Pose,
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub reward: RewardConfig,
}

impl EpisodeConfig {
    pub fn new(policy: PolicyKind, start: Pose) -> Self {
        Self {
            policy,
            steps: 1000,
            eta: 0.0,
            seed: 0,
            mode: WorldMode::MATCHED,
            start,
            sensor: SensorConfig::default(),
            reward: RewardConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub world: String,
    pub policy: PolicyKind,
    pub eta: f64,
    pub seed: u64,
    pub mode: String,
    pub steps: usize,
    pub start: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    pub action: Action,
    pub true_pose: Pose,
    pub est_pose: Pose,
    pub bump: bool,
    pub reward_total: f64,
    pub agent_coverage_m2: f64,
    pub true_coverage_m2: f64,
}

/// One row per executed step; row `t` describes the state after action `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub header: TraceHeader,
    pub steps: Vec<TraceStep>,
}

impl EpisodeTrace {
    pub fn final_true_coverage(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.true_coverage_m2)
    }

    pub fn true_poses(&self) -> Vec<Pose> {
        std::iter::once(self.header.start)
            .chain(self.steps.iter().map(|s| s.true_pose))
            .collect()
    }
}

pub struct EpisodeOutcome {
    pub trace: EpisodeTrace,
    /// Map built at estimated poses.
    pub agent_map: OccupancyGrid,
    /// Map built at true poses.
    pub true_map: OccupancyGrid,
}

/// Runs one episode. `on_step(t, agent_map)` is called after each step's
/// map update.
pub fn simulate(
    plan: &Floorplan,
    cfg: &EpisodeConfig,
    mut on_step: impl FnMut(usize, &OccupancyGrid),
) -> Result<EpisodeOutcome, EvalError> {
    if !cfg.sensor.is_valid() {
        return Err(EvalError::Config(
            "sensor configuration out of range".into(),
        ));
    }
    if !(cfg.eta >= 0.0 && cfg.eta.is_finite()) {
        return Err(EvalError::Config(format!(
            "eta must be finite and non-negative, got {}",
            cfg.eta
        )));
    }
    let mode = cfg.mode;
    let noise = NoiseConfig {
        eta: cfg.eta,
        rng_seed: derive_seed(cfg.seed, &[NOISE_STREAM]),
    };
    let mut noise_rng = rng_for(cfg.seed, &[NOISE_STREAM]);
    let mut policy_rng = rng_for(cfg.seed, &[POLICY_STREAM]);
    let mut policy = cfg.policy.build(plan);

    let mut true_pose = cfg.start;
    let mut est_pose = cfg.start;
    let mut agent_map = OccupancyGrid::new(plan.resolution());
    let mut true_map = OccupancyGrid::new(plan.resolution());
    let mut scan = render_scan(plan, mode, true_pose, &cfg.sensor)?;
    integrate(&mut agent_map, est_pose, &scan, &cfg.sensor);
    integrate(&mut true_map, true_pose, &scan, &cfg.sensor);

    let mut bump = false;
    let mut rows = Vec::with_capacity(cfg.steps);
    for t in 1..=cfg.steps {
        let action = {
            let obs = Observation::new(&scan, bump, est_pose, &agent_map);
            policy.act(&obs, &mut policy_rng)
        };
        let out = step(
            plan,
            mode,
            true_pose,
            est_pose,
            action,
            &noise,
            &mut noise_rng,
        )?;
        true_pose = out.true_pose;
        est_pose = out.est_pose;
        bump = out.bump;
        scan = render_scan(plan, mode, true_pose, &cfg.sensor)?;
        let before = agent_map.known_cells();
        integrate(&mut agent_map, est_pose, &scan, &cfg.sensor);
        integrate(&mut true_map, true_pose, &scan, &cfg.sensor);
        let reward = reward_from_counts(before, agent_map.known_cells(), bump, &cfg.reward)?;
        rows.push(TraceStep {
            t,
            action,
            true_pose,
            est_pose,
            bump,
            reward_total: reward.total,
            agent_coverage_m2: coverage(&agent_map),
            true_coverage_m2: coverage(&true_map),
        });
        on_step(t, &agent_map);
    }
    let header = TraceHeader {
        world: plan.name().to_string(),
        policy: cfg.policy,
        eta: cfg.eta,
        seed: cfg.seed,
        mode: mode.label().to_string(),
        steps: cfg.steps,
        start: cfg.start,
    };
    Ok(EpisodeOutcome {
        trace: EpisodeTrace {
            header,
            steps: rows,
        },
        agent_map,
        true_map,
    })
}

/// Runs one episode and returns its trace.
pub fn run_episode(plan: &Floorplan, cfg: &EpisodeConfig) -> Result<EpisodeTrace, EvalError> {
    Ok(simulate(plan, cfg, |_, _| {})?.trace)
}

/// Writes the header line followed by one line per step.
pub fn write_trace<W: Write>(trace: &EpisodeTrace, mut out: W) -> Result<(), EvalError> {
    serde_json::to_writer(&mut out, &trace.header)?;
    out.write_all(b"\n")?;
    for row in &trace.steps {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<EpisodeTrace, EvalError> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| EvalError::Trace("empty trace file".into()))??;
    let header: TraceHeader = serde_json::from_str(&first)?;
    let mut steps = Vec::with_capacity(header.steps);
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        steps.push(serde_json::from_str(&line)?);
    }
    if steps.len() != header.steps {
        return Err(EvalError::Trace(format!(
            "header announces {} steps but {} were found",
            header.steps,
            steps.len()
        )));
    }
    Ok(EpisodeTrace { header, steps })
}
