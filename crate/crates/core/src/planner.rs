//! Shortest paths on occupancy grids and the controller that follows them.
//!
//! Paths are 8-connected with unit straight steps and √2 diagonal steps.
//! Costs are kept exact as `a + b√2` so ties and optimality checks never
//! depend on rounding.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::geom::{angle_diff_deg, Cell, Point};
use crate::kinematics::{Action, Pose, STEP_LENGTH, TURN_ANGLE};
use crate::mapping::{CellState, OccupancyGrid};

/// Default obstacle inflation radius in meters.
pub const DEFAULT_INFLATION: f64 = 0.10;
/// Lookahead: the controller steers to the first path cell farther than this.
pub const WAYPOINT_DISTANCE: f64 = STEP_LENGTH;
/// Half a turn quantum.
pub const HEADING_TOLERANCE: f64 = TURN_ANGLE / 2.0;
/// Half a step.
pub const LATERAL_TOLERANCE: f64 = STEP_LENGTH / 2.0;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PlanError {
    #[error("no path to the goal under the current map semantics")]
    NoPath,
    #[error("start cell {0:?} is not passable or lies outside the map")]
    InvalidStart(Cell),
}

/// Path length `straight + diagonal·√2` in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PathCost {
    pub straight: u64,
    pub diagonal: u64,
}

impl PathCost {
    pub const ZERO: PathCost = PathCost {
        straight: 0,
        diagonal: 0,
    };
    pub const STRAIGHT: PathCost = PathCost {
        straight: 1,
        diagonal: 0,
    };
    pub const DIAGONAL: PathCost = PathCost {
        straight: 0,
        diagonal: 1,
    };

    pub fn value(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    pub fn meters(self, resolution: f64) -> f64 {
        self.value() * resolution
    }
}

impl std::ops::Add for PathCost {
    type Output = PathCost;
    fn add(self, rhs: PathCost) -> PathCost {
        PathCost {
            straight: self.straight + rhs.straight,
            diagonal: self.diagonal + rhs.diagonal,
        }
    }
}

impl Ord for PathCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // compare da against db·√2
        let da = self.straight as i128 - other.straight as i128;
        let db = other.diagonal as i128 - self.diagonal as i128;
        match (da.signum(), db.signum()) {
            (0, 0) => Ordering::Equal,
            (a, b) if a >= 0 && b <= 0 => Ordering::Greater,
            (a, b) if a <= 0 && b >= 0 => Ordering::Less,
            (1, _) => (da * da).cmp(&(2 * db * db)),
            _ => (2 * db * db).cmp(&(da * da)),
        }
    }
}

impl PartialOrd for PathCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Octile distance: the exact 8-connected cost between two cells on an empty grid.
pub fn octile(a: Cell, b: Cell) -> PathCost {
    let dx = a.x.abs_diff(b.x);
    let dy = a.y.abs_diff(b.y);
    PathCost {
        straight: dx.max(dy) - dx.min(dy),
        diagonal: dx.min(dy),
    }
}

/// Read access to a trinary grid, as seen by the planner.
pub trait PlanningGrid {
    fn resolution(&self) -> f64;
    /// Bottom-left cell and size of the searchable area.
    fn extent(&self) -> (Cell, usize, usize);
    /// Cell state; Unknown outside the extent.
    fn state(&self, cell: Cell) -> CellState;

    fn cell_at(&self, p: Point) -> Cell {
        Cell::containing(p, self.resolution())
    }

    /// Fills `out` with the states of cells `(x0 + i, y)`.
    fn read_row(&self, y: i64, x0: i64, out: &mut [CellState]) {
        for (i, s) in out.iter_mut().enumerate() {
            *s = self.state(Cell::new(x0 + i as i64, y));
        }
    }
}

impl PlanningGrid for OccupancyGrid {
    fn resolution(&self) -> f64 {
        OccupancyGrid::resolution(self)
    }

    fn extent(&self) -> (Cell, usize, usize) {
        OccupancyGrid::extent(self)
    }

    fn state(&self, cell: Cell) -> CellState {
        self.get(cell)
    }

    fn read_row(&self, y: i64, x0: i64, out: &mut [CellState]) {
        match self.row(y) {
            Some((min_x, row)) if min_x == x0 && row.len() == out.len() => out.copy_from_slice(row),
            _ => {
                for (i, s) in out.iter_mut().enumerate() {
                    *s = self.get(Cell::new(x0 + i as i64, y));
                }
            }
        }
    }
}

/// Which cells a search may enter.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanRules {
    /// Treat Unknown cells as passable.
    pub unknown_is_free: bool,
    /// Cells whose center lies within this distance of an Occupied cell
    /// center are impassable, except near the start and the goal.
    pub inflation_radius: f64,
    /// Extra impassable cells.
    pub blocked: Vec<Cell>,
    /// Accept the start cell whatever its state.
    pub force_start: bool,
}

impl Default for PlanRules {
    fn default() -> Self {
        Self {
            unknown_is_free: false,
            inflation_radius: DEFAULT_INFLATION,
            blocked: Vec::new(),
            force_start: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanQuery {
    pub start: Point,
    pub goal: Point,
    pub rules: PlanRules,
    /// Give up (NoPath) once every remaining path would be longer than this
    /// many meters.
    pub max_length: Option<f64>,
}

impl PlanQuery {
    pub fn new(start: Point, goal: Point) -> Self {
        Self {
            start,
            goal,
            rules: PlanRules::default(),
            max_length: None,
        }
    }

    pub fn max_length(mut self, meters: f64) -> Self {
        self.max_length = Some(meters);
        self
    }

    pub fn unknown_is_free(mut self, yes: bool) -> Self {
        self.rules.unknown_is_free = yes;
        self
    }

    pub fn inflation_radius(mut self, meters: f64) -> Self {
        self.rules.inflation_radius = meters;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    /// Start cell first, goal cell last.
    pub cells: Vec<Cell>,
    pub cost: PathCost,
}

impl Path {
    pub fn length_m(&self, resolution: f64) -> f64 {
        self.cost.meters(resolution)
    }
}

const NEIGHBORS: [(i64, i64, PathCost); 8] = [
    (1, 0, PathCost::STRAIGHT),
    (0, 1, PathCost::STRAIGHT),
    (-1, 0, PathCost::STRAIGHT),
    (0, -1, PathCost::STRAIGHT),
    (1, 1, PathCost::DIAGONAL),
    (-1, 1, PathCost::DIAGONAL),
    (-1, -1, PathCost::DIAGONAL),
    (1, -1, PathCost::DIAGONAL),
];

/// Cell offsets whose centers lie within `radius` meters of the origin cell's center.
pub fn disk_offsets(radius: f64, resolution: f64) -> Vec<(i64, i64)> {
    // squared cell distances are integers; the slack absorbs rounding in
    // radius / resolution
    let r = radius / resolution;
    let r2 = r * r + 1e-6;
    let n = (r + 1e-9).floor() as i64;
    let mut out = Vec::new();
    for dy in -n..=n {
        for dx in -n..=n {
            if (dx * dx + dy * dy) as f64 <= r2 {
                out.push((dx, dy));
            }
        }
    }
    out
}

const NONE: u32 = u32::MAX;
const UNKNOWN: u8 = CellState::Unknown as u8;
const FREE: u8 = CellState::Free as u8;
const OCCUPIED: u8 = CellState::Occupied as u8;
/// Padding around the extent; never enterable, never an obstacle.
const OUTSIDE: u8 = 3;

/// Reusable search workspace. The grid is copied into a padded local block
/// at the start of every search so that neighbor and inflation lookups are
/// plain index arithmetic. Buffers are stamped with a generation counter so
/// no clearing is needed between searches on the same extent.
#[derive(Debug, Default)]
pub struct Planner {
    extent: (Cell, usize, usize),
    pad: usize,
    /// World cell of local index 0.
    origin: Cell,
    width: usize,
    generation: u32,
    states: Vec<u8>,
    row: Vec<CellState>,
    seen: Vec<u32>,
    closed: Vec<u32>,
    dist: Vec<PathCost>,
    parent: Vec<u32>,
    pass_seen: Vec<u32>,
    pass: Vec<bool>,
    blocked: Vec<u32>,
    inflation: Vec<isize>,
    steps: [(isize, i64, i64, PathCost); 8],
    /// (f, h, index); f64 bits order like the values since both are >= 0.
    heap: BinaryHeap<Reverse<(u64, u64, u32)>>,
}

/// Per-search passability context.
struct Ctx {
    unknown_is_free: bool,
    start: Cell,
    goal: Option<Cell>,
    exempt_r2: f64,
}

impl Planner {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset<G: PlanningGrid>(&mut self, grid: &G, rules: &PlanRules) {
        let disk = disk_offsets(rules.inflation_radius, grid.resolution());
        let reach = disk
            .iter()
            .map(|&(dx, _)| dx.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let pad = reach.max(1);
        let extent = grid.extent();
        let (min, w, h) = extent;
        if extent != self.extent
            || pad != self.pad
            || self.generation == u32::MAX
            || self.states.is_empty()
        {
            self.extent = extent;
            self.pad = pad;
            self.origin = min.offset(-(pad as i64), -(pad as i64));
            self.width = w + 2 * pad;
            let n = self.width * (h + 2 * pad);
            self.generation = 0;
            self.states = vec![OUTSIDE; n];
            self.seen = vec![0; n];
            self.closed = vec![0; n];
            self.dist = vec![PathCost::ZERO; n];
            self.parent = vec![NONE; n];
            self.pass_seen = vec![0; n];
            self.pass = vec![false; n];
            self.blocked = vec![0; n];
        }
        self.row.resize(w, CellState::Unknown);
        for y in 0..h {
            grid.read_row(min.y + y as i64, min.x, &mut self.row);
            let at = (y + pad) * self.width + pad;
            for (dst, &src) in self.states[at..at + w].iter_mut().zip(&self.row) {
                *dst = src as u8;
            }
        }
        let stride = self.width as isize;
        self.inflation = disk
            .iter()
            .map(|&(dx, dy)| dy as isize * stride + dx as isize)
            .collect();
        for (k, &(dx, dy, cost)) in NEIGHBORS.iter().enumerate() {
            self.steps[k] = (dy as isize * stride + dx as isize, dx, dy, cost);
        }
        self.generation += 1;
        self.heap.clear();
        for &c in &rules.blocked {
            if let Some(i) = self.index(c) {
                self.blocked[i] = self.generation;
            }
        }
    }

    /// Local index of a cell inside the grid extent.
    fn index(&self, c: Cell) -> Option<usize> {
        let (min, w, h) = self.extent;
        let dx = c.x - min.x;
        let dy = c.y - min.y;
        if dx < 0 || dy < 0 || dx >= w as i64 || dy >= h as i64 {
            return None;
        }
        Some((dy as usize + self.pad) * self.width + dx as usize + self.pad)
    }

    fn cell(&self, i: usize) -> Cell {
        self.origin
            .offset((i % self.width) as i64, (i / self.width) as i64)
    }

    fn near(a: Cell, b: Cell, r2: f64) -> bool {
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        ((dx * dx + dy * dy) as f64) <= r2
    }

    fn state_ok(&self, ctx: &Ctx, i: usize) -> bool {
        match self.states[i] {
            FREE => true,
            UNKNOWN => ctx.unknown_is_free,
            _ => false,
        }
    }

    fn is_inflated(&mut self, i: usize) -> bool {
        if self.pass_seen[i] == self.generation {
            return self.pass[i];
        }
        let states = &self.states;
        let hit = self
            .inflation
            .iter()
            .any(|&o| states[(i as isize + o) as usize] == OCCUPIED);
        self.pass_seen[i] = self.generation;
        self.pass[i] = hit;
        hit
    }

    fn passable(&mut self, ctx: &Ctx, i: usize, c: Cell) -> bool {
        if self.blocked[i] == self.generation || !self.state_ok(ctx, i) {
            return false;
        }
        let exempt = Self::near(c, ctx.start, ctx.exempt_r2)
            || ctx.goal.is_some_and(|g| Self::near(c, g, ctx.exempt_r2));
        exempt || !self.is_inflated(i)
    }

    fn check_start(&self, ctx: &Ctx, rules: &PlanRules) -> Result<usize, PlanError> {
        let i = self
            .index(ctx.start)
            .ok_or(PlanError::InvalidStart(ctx.start))?;
        if rules.force_start || (self.blocked[i] != self.generation && self.state_ok(ctx, i)) {
            Ok(i)
        } else {
            Err(PlanError::InvalidStart(ctx.start))
        }
    }

    fn exempt_r2(rules: &PlanRules, resolution: f64) -> f64 {
        let r = rules.inflation_radius / resolution;
        r * r + 1e-6
    }

    fn trace(&self, mut i: usize) -> Path {
        let cost = self.dist[i];
        let mut cells = vec![self.cell(i)];
        while self.parent[i] != NONE {
            i = self.parent[i] as usize;
            cells.push(self.cell(i));
        }
        cells.reverse();
        Path { cells, cost }
    }

    /// Best-first search. `h` must be a consistent heuristic; `is_target`
    /// decides termination when a cell is settled. Ties on f go to the
    /// smaller h, then to the smaller (y, x). Keys are compared as floats:
    /// distinct costs a + b√2 with grid-sized a and b differ by far more
    /// than rounding error.
    fn search<H, T>(
        &mut self,
        ctx: &Ctx,
        start: usize,
        bound: f64,
        h: H,
        mut is_target: T,
    ) -> Result<Path, PlanError>
    where
        H: Fn(Cell) -> PathCost,
        T: FnMut(Cell) -> bool,
    {
        let gen = self.generation;
        self.seen[start] = gen;
        self.dist[start] = PathCost::ZERO;
        self.parent[start] = NONE;
        let h0 = h(ctx.start).value().to_bits();
        self.heap.push(Reverse((h0, h0, start as u32)));
        while let Some(Reverse((f, _, i))) = self.heap.pop() {
            if f64::from_bits(f) > bound {
                break;
            }
            let i = i as usize;
            if self.closed[i] == gen {
                continue;
            }
            self.closed[i] = gen;
            let c = self.cell(i);
            if is_target(c) {
                return Ok(self.trace(i));
            }
            let g = self.dist[i];
            for k in 0..8 {
                let (o, dx, dy, step) = self.steps[k];
                let j = (i as isize + o) as usize;
                if self.closed[j] == gen {
                    continue;
                }
                let n = c.offset(dx, dy);
                if !self.passable(ctx, j, n) {
                    continue;
                }
                let cand = g + step;
                if self.seen[j] != gen || cand < self.dist[j] {
                    self.seen[j] = gen;
                    self.dist[j] = cand;
                    self.parent[j] = i as u32;
                    let hn = h(n);
                    self.heap.push(Reverse((
                        (cand + hn).value().to_bits(),
                        hn.value().to_bits(),
                        j as u32,
                    )));
                }
            }
        }
        Err(PlanError::NoPath)
    }

    /// Minimal-cost path from the start cell to the goal cell (A*).
    pub fn plan<G: PlanningGrid>(&mut self, grid: &G, q: &PlanQuery) -> Result<Path, PlanError> {
        self.reset(grid, &q.rules);
        let ctx = Ctx {
            unknown_is_free: q.rules.unknown_is_free,
            start: grid.cell_at(q.start),
            goal: Some(grid.cell_at(q.goal)),
            exempt_r2: Self::exempt_r2(&q.rules, grid.resolution()),
        };
        let start = self.check_start(&ctx, &q.rules)?;
        let goal = ctx.goal.unwrap();
        if goal != ctx.start {
            let Some(gi) = self.index(goal) else {
                return Err(PlanError::NoPath);
            };
            if !self.passable(&ctx, gi, goal) {
                return Err(PlanError::NoPath);
            }
        }
        let bound = q
            .max_length
            .map_or(f64::INFINITY, |m| m / grid.resolution() + 1e-9);
        self.search(&ctx, start, bound, |c| octile(c, goal), |c| c == goal)
    }

    /// Cheapest path to any passable cell accepted by `is_target` (Dijkstra).
    /// Among equally cheap targets the smallest cell in (y, x) order wins.
    pub fn nearest<G, T>(
        &mut self,
        grid: &G,
        start: Point,
        rules: &PlanRules,
        is_target: T,
    ) -> Result<Path, PlanError>
    where
        G: PlanningGrid,
        T: FnMut(Cell) -> bool,
    {
        self.reset(grid, rules);
        let ctx = Ctx {
            unknown_is_free: rules.unknown_is_free,
            start: grid.cell_at(start),
            goal: None,
            exempt_r2: Self::exempt_r2(rules, grid.resolution()),
        };
        let start = self.check_start(&ctx, rules)?;
        self.search(&ctx, start, f64::INFINITY, |_| PathCost::ZERO, is_target)
    }
}

/// One-shot convenience wrapper around [`Planner::plan`].
pub fn plan_path<G: PlanningGrid>(grid: &G, q: &PlanQuery) -> Result<Path, PlanError> {
    Planner::new().plan(grid, q)
}

/// Greedy controller for following a grid path.
///
/// Steers to the first path cell whose center is farther than 0.25 m (or the
/// last cell). Turns while the heading error exceeds 4.5°, choosing the
/// shorter direction and TurnLeft at exactly 180°; strafes when aligned but
/// laterally off by more than 0.125 m; otherwise moves forward.
pub fn path_to_action<G: PlanningGrid>(
    grid: &G,
    path: &[Cell],
    pose: Pose,
    blocked: &[Cell],
) -> Action {
    assert!(!path.is_empty(), "path_to_action needs a non-empty path");
    let res = grid.resolution();
    let here = pose.position();
    let far = path
        .iter()
        .position(|c| c.center(res).distance(here) > WAYPOINT_DISTANCE)
        .unwrap_or(path.len() - 1);
    // farthest candidate reachable in a straight line; corners of walls
    // next to the path would otherwise be cut
    let waypoint = (1..=far)
        .rev()
        .map(|i| path[i].center(res))
        .find(|&p| segment_clear(grid, here, p, blocked))
        .unwrap_or_else(|| path[far.min(1)].center(res));
    let dx = waypoint.x - here.x;
    let dy = waypoint.y - here.y;
    if dx.hypot(dy) < 1e-12 {
        return Action::TurnLeft;
    }
    let bearing = dy.atan2(dx).to_degrees();
    let err = angle_diff_deg(bearing, pose.theta);
    if err.abs() > HEADING_TOLERANCE {
        return if err > 0.0 {
            Action::TurnLeft
        } else {
            Action::TurnRight
        };
    }
    let (sin, cos) = pose.heading_rad().sin_cos();
    let lateral = -dx * sin + dy * cos;
    if lateral > LATERAL_TOLERANCE {
        Action::StrafeLeft
    } else if lateral < -LATERAL_TOLERANCE {
        Action::StrafeRight
    } else {
        Action::Forward
    }
}

/// True when no cell sampled along the segment, other than the one holding
/// `from`, is Occupied or listed in `blocked`.
pub fn segment_clear<G: PlanningGrid>(grid: &G, from: Point, to: Point, blocked: &[Cell]) -> bool {
    let res = grid.resolution();
    let start = grid.cell_at(from);
    let n = (from.distance(to) / (0.5 * res)).ceil().max(1.0) as usize;
    (1..=n).all(|k| {
        let f = k as f64 / n as f64;
        let c = grid.cell_at(Point::new(
            from.x + f * (to.x - from.x),
            from.y + f * (to.y - from.y),
        ));
        c == start || (grid.state(c) != CellState::Occupied && !blocked.contains(&c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_map(w: i64, h: i64) -> OccupancyGrid {
        let mut map = OccupancyGrid::new(0.05);
        for y in 0..h {
            for x in 0..w {
                map.set(Cell::new(x, y), CellState::Free);
            }
        }
        map
    }

    fn center(x: i64, y: i64) -> Point {
        Cell::new(x, y).center(0.05)
    }

    #[test]
    fn cost_order_is_exact() {
        let c = |s, d| PathCost {
            straight: s,
            diagonal: d,
        };
        assert!(c(2, 0) > c(0, 1));
        assert!(c(1, 0) < c(0, 1));
        assert!(c(3, 2) < c(6, 0));
        assert!(c(0, 5) > c(7, 0));
        assert!(c(0, 5) < c(8, 0));
        assert!(c(10, 0) > c(2, 5));
        assert_eq!(c(4, 4).cmp(&c(4, 4)), Ordering::Equal);
        // 99 + 70√2 vs 198 + 0√2: 70√2 ≈ 98.99495
        assert!(c(99, 70) < c(198, 0));
    }

    #[test]
    fn straight_corridor() {
        let map = free_map(30, 7);
        let q = PlanQuery::new(center(5, 3), center(15, 3)).inflation_radius(0.0);
        let path = plan_path(&map, &q).unwrap();
        assert_eq!(path.cells.len(), 11);
        assert_eq!(
            path.cost,
            PathCost {
                straight: 10,
                diagonal: 0
            }
        );
        assert!((path.length_m(0.05) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn goal_inside_occupied_ring_is_unreachable() {
        let mut map = OccupancyGrid::new(0.05);
        map.ensure_contains(Cell::new(0, 0), Cell::new(40, 40));
        for d in -3i64..=3 {
            for (x, y) in [(20 + d, 17), (20 + d, 23), (17, 20 + d), (23, 20 + d)] {
                map.set(Cell::new(x, y), CellState::Occupied);
            }
        }
        let q = PlanQuery::new(center(2, 2), center(20, 20)).unknown_is_free(true);
        assert_eq!(plan_path(&map, &q), Err(PlanError::NoPath));
    }

    #[test]
    fn occupied_start_is_invalid() {
        let mut map = free_map(10, 10);
        map.set(Cell::new(2, 2), CellState::Occupied);
        let q = PlanQuery::new(center(2, 2), center(7, 7));
        assert_eq!(
            plan_path(&map, &q),
            Err(PlanError::InvalidStart(Cell::new(2, 2)))
        );
        let mut forced = q.clone();
        forced.rules.force_start = true;
        assert!(plan_path(&map, &forced).is_ok());
    }

    #[test]
    fn unknown_cells_follow_the_flag() {
        let mut map = OccupancyGrid::new(0.05);
        for y in 0..5 {
            for x in (0..20).filter(|&x| x != 10) {
                map.set(Cell::new(x, y), CellState::Free);
            }
        }
        let q = PlanQuery::new(center(2, 2), center(17, 2)).inflation_radius(0.0);
        assert_eq!(plan_path(&map, &q), Err(PlanError::NoPath));
        assert!(plan_path(&map, &q.clone().unknown_is_free(true)).is_ok());
    }

    #[test]
    fn inflation_keeps_paths_off_walls() {
        // a wall across the middle with a gap; gap of 3 cells is too narrow when inflated
        let build = |gap: i64| {
            let mut map = free_map(40, 40);
            for y in 0..40 {
                if !(20..20 + gap).contains(&y) {
                    map.set(Cell::new(20, y), CellState::Occupied);
                }
            }
            map
        };
        let q = PlanQuery::new(center(5, 21), center(35, 21));
        assert_eq!(plan_path(&build(3), &q), Err(PlanError::NoPath));
        let path = plan_path(&build(5), &q).unwrap();
        assert!(path.cells.iter().any(|c| c.x == 20 && c.y == 22));
        assert!(plan_path(&build(3), &q.clone().inflation_radius(0.0)).is_ok());
    }

    #[test]
    fn blocked_cells_are_avoided() {
        let map = free_map(20, 3);
        let mut q = PlanQuery::new(center(2, 1), center(17, 1)).inflation_radius(0.0);
        q.rules.blocked = vec![Cell::new(10, 0), Cell::new(10, 1), Cell::new(10, 2)];
        assert_eq!(plan_path(&map, &q), Err(PlanError::NoPath));
    }

    #[test]
    fn nearest_target_ties_break_lexicographically() {
        let map = free_map(21, 21);
        let rules = PlanRules {
            inflation_radius: 0.0,
            ..PlanRules::default()
        };
        let targets = [Cell::new(15, 10), Cell::new(5, 10), Cell::new(10, 15)];
        let path = Planner::new()
            .nearest(&map, center(10, 10), &rules, |c| targets.contains(&c))
            .unwrap();
        assert_eq!(*path.cells.last().unwrap(), Cell::new(5, 10));
        assert_eq!(
            path.cost,
            PathCost {
                straight: 5,
                diagonal: 0
            }
        );
    }

    #[test]
    fn planner_is_reusable_across_extents() {
        let mut planner = Planner::new();
        let small = free_map(10, 10);
        let big = free_map(30, 30);
        let q = PlanQuery::new(center(1, 1), center(8, 8)).inflation_radius(0.0);
        let a = planner.plan(&small, &q).unwrap();
        let b = planner.plan(&big, &q).unwrap();
        let c = planner.plan(&small, &q).unwrap();
        assert_eq!(a, c);
        assert_eq!(a.cost, b.cost);
        assert_eq!(
            a.cost,
            PathCost {
                straight: 0,
                diagonal: 7
            }
        );
    }

    #[test]
    fn controller_basics() {
        let open = OccupancyGrid::new(0.05);
        let path = [Cell::new(0, 0), Cell::new(10, 0)];
        // ahead
        assert_eq!(
            path_to_action(&open, &path, Pose::new(0.025, 0.025, 0.0), &[]),
            Action::Forward
        );
        // 90° to the left of a pose facing -y
        assert_eq!(
            path_to_action(&open, &path, Pose::new(0.025, 0.025, 270.0), &[]),
            Action::TurnLeft
        );
        assert_eq!(
            path_to_action(&open, &path, Pose::new(0.025, 0.025, 90.0), &[]),
            Action::TurnRight
        );
        // directly behind: tie goes left
        assert_eq!(
            path_to_action(&open, &path, Pose::new(0.025, 0.025, 180.0), &[]),
            Action::TurnLeft
        );
        // small misalignment is tolerated
        assert_eq!(
            path_to_action(&open, &path, Pose::new(0.025, 0.025, 4.0), &[]),
            Action::Forward
        );
    }

    #[test]
    fn controller_strafes_toward_a_distant_offset_waypoint() {
        // waypoint 2 m ahead and 0.15 m to the left: bearing error ≈ 4.3°
        let path = [Cell::new(40, 3)];
        let pose = Pose::new(0.025, 0.025, 0.0);
        assert_eq!(
            path_to_action(&OccupancyGrid::new(0.05), &path, pose, &[]),
            Action::StrafeLeft
        );
    }

    #[test]
    fn controller_does_not_cut_wall_corners() {
        // path runs down column 1; the waypoint 0.3 m below is in column 0
        // and the straight line to it clips the wall at (0, -2)
        let mut map = free_map(3, 1);
        map.set(Cell::new(0, -2), CellState::Occupied);
        let path: Vec<Cell> = [(1, 0), (1, -1), (1, -2), (1, -3), (1, -4), (0, -5), (0, -6)]
            .map(|(x, y)| Cell::new(x, y))
            .to_vec();
        let pose = Pose::new(0.052, 0.025, 263.0);
        assert_eq!(
            path_to_action(&OccupancyGrid::new(0.05), &path, pose, &[]),
            Action::Forward
        );
        assert_eq!(path_to_action(&map, &path, pose, &[]), Action::TurnLeft);
        let blocked = [Cell::new(0, -2)];
        assert_eq!(
            path_to_action(&OccupancyGrid::new(0.05), &path, pose, &blocked),
            Action::TurnLeft
        );
    }

    #[test]
    fn following_a_path_reaches_the_goal() {
        use crate::kinematics::transition_true;
        use crate::world::{CellKind, Floorplan, WorldMode};
        let (w, h) = (80usize, 60usize);
        let mut cells = vec![CellKind::Wall; w * h];
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                cells[y * w + x] = CellKind::Free;
            }
        }
        let plan = Floorplan::new("r", w, h, 0.05, cells).unwrap();
        let map = free_map(w as i64, h as i64);
        let goal = center(70, 50);
        let mut pose = Pose::new(0.3, 0.3, 200.0);
        let mut steps = 0;
        while pose.position().distance(goal) > 0.25 {
            let path = plan_path(
                &map,
                &PlanQuery::new(pose.position(), goal).inflation_radius(0.0),
            )
            .unwrap();
            let action = path_to_action(&map, &path.cells, pose, &[]);
            let (next, bump) = transition_true(&plan, WorldMode::MATCHED, pose, action).unwrap();
            assert!(!bump);
            pose = next;
            steps += 1;
            assert!(steps < 100, "controller did not converge");
        }
    }
}
