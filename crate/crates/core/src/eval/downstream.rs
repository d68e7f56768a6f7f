//! Reusing exploration experience: goal localization by descriptor matching
//! and point-goal navigation scored with SPL.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{Cell, Point};
use crate::kinematics::{transition_true, Pose, STEP_LENGTH};
use crate::mapping::{fine_ego_crop, integrate, CellState, OccupancyGrid, CROP_CELLS};
use crate::planner::{path_to_action, PlanQuery, PlanRules, Planner, PlanningGrid};
use crate::policies::BumpMemory;
use crate::seed::rng_for;
use crate::sensor::{render_scan, SensorConfig};
use crate::world::{Floorplan, WorldMode};

use super::episode::{simulate, EpisodeConfig};
use super::spl::SplRecord;
use super::{sample_pose, EvalError};

const TASK_STREAM: u64 = 20;
/// Side of one histogram block in fine-crop cells (4 × 4 blocks).
const BLOCK: usize = CROP_CELLS / 4;

/// Pose descriptor: the depth scan scaled by the range limit, followed by a
/// 3-bin (unknown, free, occupied) histogram over 4 × 4 blocks of the fine
/// egocentric crop of a map built from that single scan; L2-normalized.
pub fn descriptor(
    plan: &Floorplan,
    mode: WorldMode,
    pose: Pose,
    sensor: &SensorConfig,
) -> Result<Vec<f64>, EvalError> {
    let scan = render_scan(plan, mode, pose, sensor)?;
    let mut map = OccupancyGrid::new(plan.resolution());
    integrate(&mut map, pose, &scan, sensor);
    let crop = fine_ego_crop(&map, pose);
    let mut v: Vec<f64> = scan.depths.iter().map(|d| d / sensor.max_range).collect();
    let norm = (BLOCK * BLOCK) as f64;
    for by in 0..4 {
        for bx in 0..4 {
            let mut counts = [0usize; 3];
            for row in by * BLOCK..(by + 1) * BLOCK {
                for col in bx * BLOCK..(bx + 1) * BLOCK {
                    counts[crop.get(row, col) as usize] += 1;
                }
            }
            v.extend(counts.iter().map(|&c| c as f64 / norm));
        }
    }
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len > 0.0 {
        v.iter_mut().for_each(|x| *x /= len);
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub descriptor: Vec<f64>,
    pub pose: Pose,
}

/// Experience gathered by one exploration run: one entry per step plus the
/// final map.
#[derive(Debug, Clone)]
pub struct ExperienceLog {
    pub entries: Vec<LogEntry>,
    pub map: OccupancyGrid,
}

/// Runs an exploration episode and records a descriptor at every step's
/// true pose.
pub fn collect_experience(
    plan: &Floorplan,
    cfg: &EpisodeConfig,
) -> Result<ExperienceLog, EvalError> {
    let out = simulate(plan, cfg, |_, _| {})?;
    let entries = out
        .trace
        .steps
        .iter()
        .map(|s| {
            Ok(LogEntry {
                descriptor: descriptor(plan, cfg.mode, s.true_pose, &cfg.sensor)?,
                pose: s.true_pose,
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(ExperienceLog {
        entries,
        map: out.true_map,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Poses of the `k` log entries nearest to `goal` in descriptor space,
/// closest first; ties go to the earlier entry.
pub fn localize_goal(log: &ExperienceLog, goal: &[f64], k: usize) -> Result<Vec<Pose>, EvalError> {
    if log.entries.is_empty() {
        return Err(EvalError::EmptyLog);
    }
    let mut scored: Vec<(f64, usize)> = log
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (sq_dist(&e.descriptor, goal), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(scored
        .iter()
        .take(k)
        .map(|&(_, i)| log.entries[i].pose)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavTask {
    pub start: Pose,
    pub goal: Pose,
}

/// `n` start/goal pairs in distinct cells, both with wall clearance.
pub fn sample_tasks(plan: &Floorplan, n: usize, seed: u64) -> Vec<NavTask> {
    (0..n)
        .map(|i| {
            let mut rng = rng_for(seed, &[TASK_STREAM, i as u64]);
            let start = sample_pose(plan, &mut rng);
            loop {
                let goal = sample_pose(plan, &mut rng);
                if plan.cell_at(goal.position()) != plan.cell_at(start.position()) {
                    return NavTask { start, goal };
                }
            }
        })
        .collect()
}

/// Top-1 and best-of-top-k position errors for each task's goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationErrors {
    pub k: usize,
    pub top1: Vec<f64>,
    pub topk: Vec<f64>,
}

pub fn localization_errors(
    plan: &Floorplan,
    mode: WorldMode,
    log: &ExperienceLog,
    tasks: &[NavTask],
    k: usize,
    sensor: &SensorConfig,
) -> Result<LocalizationErrors, EvalError> {
    let mut top1 = Vec::with_capacity(tasks.len());
    let mut topk = Vec::with_capacity(tasks.len());
    for task in tasks {
        let goal = task.goal.position();
        let found = localize_goal(log, &descriptor(plan, mode, task.goal, sensor)?, k)?;
        top1.push(found[0].position().distance(goal));
        topk.push(
            found
                .iter()
                .map(|p| p.position().distance(goal))
                .fold(f64::INFINITY, f64::min),
        );
    }
    Ok(LocalizationErrors { k, top1, topk })
}

/// Fraction of errors at or below each threshold.
pub fn success_curve(errors: &[f64], thresholds: &[f64]) -> Vec<f64> {
    thresholds
        .iter()
        .map(|&t| errors.iter().filter(|&&e| e <= t).count() as f64 / errors.len().max(1) as f64)
        .collect()
}

/// The floorplan as a planning grid: traversable cells Free, walls Occupied.
struct FloorplanView<'a>(&'a Floorplan);

impl PlanningGrid for FloorplanView<'_> {
    fn resolution(&self) -> f64 {
        self.0.resolution()
    }

    fn extent(&self) -> (Cell, usize, usize) {
        (Cell::new(0, 0), self.0.width(), self.0.height())
    }

    fn state(&self, cell: Cell) -> CellState {
        match self.0.get(cell) {
            Some(k) if k.is_traversable() => CellState::Free,
            Some(_) => CellState::Occupied,
            None => CellState::Unknown,
        }
    }
}

/// Shortest 8-connected path length (meters) between the cells containing
/// `start` and `goal`, over traversable floorplan cells with no inflation.
pub fn oracle_path_length(plan: &Floorplan, start: Point, goal: Point) -> Option<f64> {
    let q = PlanQuery::new(start, goal).inflation_radius(0.0);
    Planner::new()
        .plan(&FloorplanView(plan), &q)
        .ok()
        .map(|p| p.length_m(plan.resolution()))
}

/// How the exploration arm turns a goal into a target location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoalLocalization {
    /// Nearest-neighbor descriptor match in the experience log.
    Descriptor,
    /// The true goal position.
    GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavConfig {
    pub success_radius: f64,
    /// Budget is `budget_factor × (⌈ℓ / 0.25⌉ + turn_allowance)` steps.
    pub budget_factor: f64,
    pub turn_allowance: usize,
    pub localization: GoalLocalization,
    pub sensor: SensorConfig,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            success_radius: 0.5,
            budget_factor: 4.0,
            turn_allowance: 20,
            localization: GoalLocalization::Descriptor,
            sensor: SensorConfig::default(),
        }
    }
}

impl NavConfig {
    pub fn budget(&self, shortest: f64) -> usize {
        (self.budget_factor * ((shortest / STEP_LENGTH).ceil() + self.turn_allowance as f64)).ceil()
            as usize
    }
}

/// One navigation trial. With a log, the agent starts from the explored map
/// and plans with unknown space blocked, switching to unknown-as-free for
/// the rest of the trial once that finds no path. Without a log it starts
/// from an empty map with unknown space free. Either way it senses and
/// replans every step.
pub fn navigate(
    plan: &Floorplan,
    mode: WorldMode,
    log: Option<&ExperienceLog>,
    task: &NavTask,
    cfg: &NavConfig,
) -> Result<SplRecord, EvalError> {
    let goal = task.goal.position();
    let shortest = oracle_path_length(plan, task.start.position(), goal)
        .ok_or_else(|| EvalError::Config("goal is unreachable in the floorplan".into()))?;
    let target = match (log, cfg.localization) {
        (Some(log), GoalLocalization::Descriptor) => {
            localize_goal(log, &descriptor(plan, mode, task.goal, &cfg.sensor)?, 1)?[0].position()
        }
        _ => goal,
    };
    let res = plan.resolution();
    let mut map = log.map_or_else(|| OccupancyGrid::new(res), |l| l.map.clone());
    // the planner only searches inside the map's extent; the building's
    // bounding box is taken as known
    map.ensure_contains(
        Cell::new(0, 0),
        Cell::new(plan.width() as i64 - 1, plan.height() as i64 - 1),
    );
    let mut unknown_is_free = log.is_none();
    let mut pose = task.start;
    let scan = render_scan(plan, mode, pose, &cfg.sensor)?;
    integrate(&mut map, pose, &scan, &cfg.sensor);
    let mut planner = Planner::new();
    let mut bumps = BumpMemory::default();
    let mut bump = false;
    let mut traveled = 0.0;
    for _ in 0..cfg.budget(shortest) {
        if pose.position().distance(target) <= cfg.success_radius {
            break;
        }
        bumps.observe(bump, pose, res);
        let mut q = PlanQuery {
            start: pose.position(),
            goal: target,
            rules: PlanRules {
                unknown_is_free,
                blocked: bumps.cells(),
                force_start: true,
                ..PlanRules::default()
            },
            max_length: None,
        };
        let mut path = planner.plan(&map, &q);
        if path.is_err() && !unknown_is_free {
            unknown_is_free = true;
            q.rules.unknown_is_free = true;
            path = planner.plan(&map, &q);
        }
        let Ok(path) = path else { break };
        let action = path_to_action(&map, &path.cells, pose, &q.rules.blocked);
        bumps.acted(action);
        let (next, b) = transition_true(plan, mode, pose, action)?;
        traveled += next.position().distance(pose.position());
        pose = next;
        bump = b;
        let scan = render_scan(plan, mode, pose, &cfg.sensor)?;
        integrate(&mut map, pose, &scan, &cfg.sensor);
    }
    Ok(SplRecord {
        shortest,
        executed: traveled,
        success: pose.position().distance(goal) <= cfg.success_radius,
    })
}

/// Runs every task (in parallel) and returns records in task order.
pub fn downstream_navigation(
    plan: &Floorplan,
    mode: WorldMode,
    log: Option<&ExperienceLog>,
    tasks: &[NavTask],
    cfg: &NavConfig,
) -> Result<Vec<SplRecord>, EvalError> {
    tasks
        .par_iter()
        .map(|task| navigate(plan, mode, log, task, cfg))
        .collect()
}
