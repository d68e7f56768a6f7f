//! Frontier-based exploration.
//!
//! The agent keeps a target frontier cell, replans to it every step with
//! unknown space treated as free, and picks a new target (the nearest by
//! path cost) once the old one is reached or becomes unreachable. A target
//! that stops being a frontier is first replaced by a frontier cell next to
//! it, if there is one.

use std::collections::HashSet;

use rand::RngCore;

use crate::geom::{Cell, Point};
use crate::kinematics::{Action, Pose, STEP_LENGTH};
use crate::mapping::{CellState, OccupancyGrid};
use crate::planner::{
    disk_offsets, path_to_action, segment_clear, PlanError, PlanQuery, PlanRules, Planner,
    PlanningGrid,
};
use crate::world::{CellKind, Floorplan};

use super::{Observation, Policy, PolicyKind};

/// A target is reached when the agent's cell equals it or is this close.
pub const ARRIVAL_RADIUS: f64 = STEP_LENGTH;
/// Frontier cells this close to the agent are not selected as targets.
pub const MIN_TARGET_DISTANCE: f64 = STEP_LENGTH;
/// Steps a collision-derived obstacle stays in the planner's view.
pub const BUMP_MEMORY: u64 = 100;
/// Bound on the flood fill over one door.
const MAX_DOOR_CELLS: usize = 4096;
/// A target is dropped, and the nearest frontier chosen afresh, when the
/// path to it grows by more than this between steps (meters).
pub const DETOUR_SLACK: f64 = 1.0;

/// Free cell with at least one Unknown 4-neighbor.
pub fn is_frontier<G: PlanningGrid + ?Sized>(grid: &G, c: Cell) -> bool {
    grid.state(c) == CellState::Free
        && c.neighbors4()
            .iter()
            .any(|&n| grid.state(n) == CellState::Unknown)
}

/// The agent's map with ground-truth doors: map cells that are Occupied
/// but are Door cells in the floorplan read as Free.
pub struct DoorCorrectedView<'a> {
    pub map: &'a OccupancyGrid,
    pub plan: &'a Floorplan,
}

impl PlanningGrid for DoorCorrectedView<'_> {
    fn resolution(&self) -> f64 {
        self.map.resolution()
    }

    fn extent(&self) -> (Cell, usize, usize) {
        self.map.extent()
    }

    fn state(&self, cell: Cell) -> CellState {
        match self.map.get(cell) {
            CellState::Occupied if self.plan.get(cell) == Some(CellKind::Door) => CellState::Free,
            s => s,
        }
    }
}

/// Short-lived obstacles inferred from collisions: after a blocked
/// translation, the cells along the attempted motion are avoided for
/// [`BUMP_MEMORY`] steps.
#[derive(Debug, Clone, Default)]
pub struct BumpMemory {
    cells: Vec<(Cell, u64)>,
    last_action: Option<Action>,
    step: u64,
}

impl BumpMemory {
    /// Call once per step before planning.
    pub fn observe(&mut self, bump_prev: bool, pose: Pose, resolution: f64) {
        self.step += 1;
        let step = self.step;
        self.cells.retain(|&(_, expiry)| expiry > step);
        if !bump_prev {
            return;
        }
        let Some(action) = self.last_action.filter(|a| !a.is_turn()) else {
            return;
        };
        let (forward, left, _) = action.displacement();
        let here = Cell::containing(pose.position(), resolution);
        for k in 1..=5 {
            let f = k as f64 / 5.0;
            let p = pose.compose(forward * f, left * f, 0.0).position();
            let c = Cell::containing(p, resolution);
            if c != here && !self.cells.iter().any(|&(b, _)| b == c) {
                self.cells.push((c, step + BUMP_MEMORY));
            }
        }
    }

    /// Records the action about to be executed.
    pub fn acted(&mut self, action: Action) {
        self.last_action = Some(action);
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.cells.iter().map(|&(c, _)| c).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct NoFrontierKey {
    revision: u64,
    x: u64,
    y: u64,
    blocked: Vec<Cell>,
    retired: usize,
}

/// Frontier-exploration state, independent of which grid view it plans on.
#[derive(Debug, Default)]
pub struct FrontierExplorer {
    planner: Planner,
    target: Option<Cell>,
    /// Length of the last path to `target`, meters.
    target_length: f64,
    /// Cells near targets that were reached without clearing them.
    retired: HashSet<Cell>,
    bumps: BumpMemory,
    no_frontier: Option<NoFrontierKey>,
    /// The two previous actions, most recent first.
    recent: [Option<Action>; 2],
    last_position: Option<Point>,
}

impl FrontierExplorer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Current target frontier cell, if any.
    pub fn target(&self) -> Option<Cell> {
        self.target
    }

    fn retire(&mut self, target: Cell, resolution: f64) {
        for (dx, dy) in disk_offsets(ARRIVAL_RADIUS, resolution) {
            self.retired.insert(target.offset(dx, dy));
        }
    }

    /// Retires every door cell 4-connected to `start`: once the agent has
    /// been through a door, the rest of it offers nothing new.
    fn retire_door(&mut self, start: Cell, is_door: impl Fn(Cell) -> bool) {
        let mut stack = vec![start];
        let mut seen = HashSet::from([start]);
        while let Some(c) = stack.pop() {
            self.retired.insert(c);
            for n in c.neighbors4() {
                if seen.len() < MAX_DOOR_CELLS && is_door(n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
    }

    /// Frontier cell closest to a target that was just cleared, within the
    /// arrival radius of it. Keeps the agent committed to one region while
    /// turning reveals the frontier bit by bit.
    fn continuation<G: PlanningGrid>(&self, grid: &G, old: Cell, here: Point) -> Option<Cell> {
        let res = grid.resolution();
        disk_offsets(ARRIVAL_RADIUS, res)
            .into_iter()
            .map(|(dx, dy)| (dx * dx + dy * dy, old.offset(dx, dy)))
            .filter(|&(_, c)| {
                is_frontier(grid, c)
                    && !self.retired.contains(&c)
                    && c.center(res).distance(here) > MIN_TARGET_DISTANCE
            })
            .min()
            .map(|(_, c)| c)
    }

    /// True if `next` would make the last three actions L, R, L or R, L, R.
    fn turn_cycle(&self, next: Action) -> bool {
        use Action::{TurnLeft as L, TurnRight as R};
        matches!(
            (self.recent, next),
            ([Some(R), Some(L)], L) | ([Some(L), Some(R)], R)
        )
    }

    fn rules(&self) -> PlanRules {
        PlanRules {
            unknown_is_free: true,
            blocked: self.bumps.cells(),
            force_start: true,
            ..PlanRules::default()
        }
    }

    /// Chooses the next action on `grid`, a view of the agent's map with
    /// revision `revision`.
    /// `is_door` marks cells known to be doors; a door target only counts as
    /// reached once the agent stands in or has just moved through a door,
    /// since doors may hide what is behind them until then.
    pub fn act_on<G: PlanningGrid>(
        &mut self,
        grid: &G,
        revision: u64,
        obs: &Observation<'_>,
        is_door: impl Fn(Cell) -> bool,
    ) -> Action {
        let res = grid.resolution();
        let pose = obs.est_pose;
        let here = pose.position();
        let here_cell = grid.cell_at(here);
        self.bumps.observe(obs.bump_prev, pose, res);

        if let Some(t) = self.target {
            let reached = if is_door(t) {
                t == here_cell
                    || self
                        .last_position
                        .is_some_and(|from| crossed(grid, from, here, &is_door))
            } else {
                t == here_cell || t.center(res).distance(here) <= ARRIVAL_RADIUS
            };
            if reached {
                if is_door(t) {
                    self.retire_door(t, &is_door);
                }
                if is_frontier(grid, t) {
                    self.retire(t, res);
                }
                self.target = None;
            } else if !is_frontier(grid, t) {
                self.target = self.continuation(grid, t, here);
            }
        }

        let rules = self.rules();
        let mut path = None;
        if let Some(t) = self.target {
            let q = PlanQuery {
                start: here,
                goal: t.center(res),
                rules: rules.clone(),
                max_length: Some(self.target_length + DETOUR_SLACK),
            };
            match self.planner.plan(grid, &q) {
                Ok(p) => path = Some(p),
                Err(PlanError::NoPath | PlanError::InvalidStart(_)) => self.target = None,
            }
        }
        if path.is_none() {
            let key = NoFrontierKey {
                revision,
                x: here.x.to_bits(),
                y: here.y.to_bits(),
                blocked: rules.blocked.clone(),
                retired: self.retired.len(),
            };
            if self.no_frontier.as_ref() != Some(&key) {
                let retired = &self.retired;
                let found = self.planner.nearest(grid, here, &rules, |c| {
                    is_frontier(grid, c)
                        && !retired.contains(&c)
                        && c.center(res).distance(here) > MIN_TARGET_DISTANCE
                });
                match found {
                    Ok(p) => {
                        self.target = p.cells.last().copied();
                        path = Some(p);
                    }
                    Err(_) => self.no_frontier = Some(key),
                }
            }
        }
        if let Some(p) = &path {
            self.target_length = p.length_m(res);
        }
        let mut action = match path {
            Some(p) => path_to_action(grid, &p.cells, pose, &rules.blocked),
            None => Action::TurnLeft,
        };
        // equal-cost paths can pull the heading back and forth as single
        // cells flip between scans; a step forward breaks the cycle
        if self.turn_cycle(action) {
            let ahead = pose.compose(STEP_LENGTH, 0.0, 0.0).position();
            if segment_clear(grid, here, ahead, &rules.blocked) {
                action = Action::Forward;
            }
        }
        self.recent = [Some(action), self.recent[0]];
        self.last_position = Some(here);
        self.bumps.acted(action);
        action
    }
}

/// True if any point sampled along `from`..=`to` lies in a door cell.
fn crossed<G: PlanningGrid>(
    grid: &G,
    from: Point,
    to: Point,
    is_door: impl Fn(Cell) -> bool,
) -> bool {
    let n = (from.distance(to) / (0.5 * grid.resolution())).ceil() as usize;
    (0..=n).any(|k| {
        let f = if n == 0 { 1.0 } else { k as f64 / n as f64 };
        is_door(grid.cell_at(Point::new(
            from.x + f * (to.x - from.x),
            from.y + f * (to.y - from.y),
        )))
    })
}

/// Frontier exploration on the agent's own map.
#[derive(Debug, Default)]
pub struct FrontierPolicy {
    explorer: FrontierExplorer,
}

impl FrontierPolicy {
    pub fn explorer(&self) -> &FrontierExplorer {
        &self.explorer
    }
}

impl Policy for FrontierPolicy {
    fn name(&self) -> &'static str {
        PolicyKind::Frontier.name()
    }

    fn act(&mut self, obs: &Observation<'_>, _rng: &mut dyn RngCore) -> Action {
        self.explorer
            .act_on(obs.map_view, obs.map_view.revision(), obs, |_| false)
    }
}

/// Upper-bound comparator: frontier exploration that knows which mapped
/// obstacles are really doors. Reads the floorplan, so it is not
/// sensor-limited.
pub struct OracleFrontierPolicy<'a> {
    plan: &'a Floorplan,
    explorer: FrontierExplorer,
}

impl<'a> OracleFrontierPolicy<'a> {
    pub fn new(plan: &'a Floorplan) -> Self {
        Self {
            plan,
            explorer: FrontierExplorer::new(),
        }
    }

    pub fn explorer(&self) -> &FrontierExplorer {
        &self.explorer
    }
}

impl Policy for OracleFrontierPolicy<'_> {
    fn name(&self) -> &'static str {
        PolicyKind::OracleFrontier.name()
    }

    fn act(&mut self, obs: &Observation<'_>, _rng: &mut dyn RngCore) -> Action {
        let view = DoorCorrectedView {
            map: obs.map_view,
            plan: self.plan,
        };
        let plan = self.plan;
        self.explorer
            .act_on(&view, obs.map_view.revision(), obs, |c| {
                plan.get(c) == Some(CellKind::Door)
            })
    }
}

/// Convenience for tests and examples: centers of all frontier cells.
pub fn frontier_points<G: PlanningGrid>(grid: &G) -> Vec<Point> {
    let (min, w, h) = grid.extent();
    let mut out = Vec::new();
    for dy in 0..h as i64 {
        for dx in 0..w as i64 {
            let c = min.offset(dx, dy);
            if is_frontier(grid, c) {
                out.push(c.center(grid.resolution()));
            }
        }
    }
    out
}
