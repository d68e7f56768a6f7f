//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use explore_core::geom::{Cell, Point};
use explore_core::mapping::{CellState, OccupancyGrid};
use explore_core::planner::{PathCost, PlanQuery};
use explore_core::world::{CellKind, Floorplan, WorldMode};
use petgraph::algo::dijkstra;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::Rng;

/// Sampling step of the depth oracle (meters).
pub const SAMPLE_STEP: f64 = 0.001;

fn cell_index(plan: &Floorplan, p: Point) -> (i64, i64) {
    let res = plan.resolution();
    ((p.x / res).floor() as i64, (p.y / res).floor() as i64)
}

fn kind_of(plan: &Floorplan, (x, y): (i64, i64)) -> Option<CellKind> {
    if x < 0 || y < 0 || x >= plan.width() as i64 || y >= plan.height() as i64 {
        return None;
    }
    Some(plan.kind(x as usize, y as usize))
}

fn blocks_light(kind: Option<CellKind>, mode: WorldMode) -> bool {
    match kind {
        None | Some(CellKind::Wall) => true,
        Some(CellKind::Door) => mode.door_mismatch,
        Some(CellKind::Free) => false,
    }
}

/// Cells met between two consecutive samples, in order. A step that changes
/// both cell indices cuts one of the two cells beside the shared corner, or
/// neither when it passes exactly through the corner.
fn cells_between(plan: &Floorplan, a: Point, b: Point) -> Vec<(i64, i64)> {
    let (ca, cb) = (cell_index(plan, a), cell_index(plan, b));
    if ca == cb {
        return Vec::new();
    }
    if ca.0 == cb.0 || ca.1 == cb.1 {
        return vec![cb];
    }
    let res = plan.resolution();
    let corner = Point::new(ca.0.max(cb.0) as f64 * res, ca.1.max(cb.1) as f64 * res);
    // side of the corner relative to the step direction
    let cross = (b.x - a.x) * (corner.y - a.y) - (b.y - a.y) * (corner.x - a.x);
    let (dx, dy) = (cb.0 - ca.0, cb.1 - ca.1);
    let between = if cross == 0.0 {
        None
    } else if (cross > 0.0) == (dx * dy > 0) {
        // corner lies to the left of a (+,+) or (-,-) step: the step crosses x first
        Some((cb.0, ca.1))
    } else {
        Some((ca.0, cb.1))
    };
    between.into_iter().chain([cb]).collect()
}

/// Depth along a ray by marching in 1 mm steps; `max_range` when nothing is
/// hit. A step that cuts a corner also checks the cell it clips between the
/// two samples. A ray that starts in a door ignores door cells until it
/// first leaves the door.
pub fn sampled_depth(
    plan: &Floorplan,
    mode: WorldMode,
    origin: Point,
    heading_rad: f64,
    max_range: f64,
) -> f64 {
    let (s, c) = heading_rad.sin_cos();
    let mut in_start_door = kind_of(plan, cell_index(plan, origin)) == Some(CellKind::Door);
    if blocks_light(kind_of(plan, cell_index(plan, origin)), mode) && !in_start_door {
        return 0.0;
    }
    let n = (max_range / SAMPLE_STEP).round() as usize;
    let mut prev = origin;
    for i in 1..=n {
        let t = i as f64 * SAMPLE_STEP;
        let p = Point::new(origin.x + t * c, origin.y + t * s);
        for cell in cells_between(plan, prev, p) {
            let kind = kind_of(plan, cell);
            if in_start_door {
                if kind == Some(CellKind::Door) {
                    continue;
                }
                in_start_door = false;
            }
            if blocks_light(kind, mode) {
                return t;
            }
        }
        prev = p;
    }
    max_range
}

/// Uniform random point inside a random traversable cell.
pub fn random_point_in_free_space<R: Rng>(plan: &Floorplan, rng: &mut R) -> Point {
    let res = plan.resolution();
    loop {
        let x = rng.random_range(0..plan.width());
        let y = rng.random_range(0..plan.height());
        if plan.kind(x, y) != CellKind::Wall {
            return Point::new(
                (x as f64 + rng.random_range(0.01..0.99)) * res,
                (y as f64 + rng.random_range(0.01..0.99)) * res,
            );
        }
    }
}

/// Planner rules restated from scratch: a cell may be entered when its state
/// is allowed, it is not blocked, and no Occupied cell lies within
/// `inflation_cells` of it, unless it is that close to the start or goal.
pub struct OracleRules {
    pub unknown_is_free: bool,
    pub inflation_cells: i64,
    pub blocked: Vec<Cell>,
    pub force_start: bool,
}

fn within(a: Cell, b: Cell, r: i64) -> bool {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    dx * dx + dy * dy <= r * r
}

/// Exact shortest 8-connected cost by Dijkstra over an explicit graph of the
/// map's extent; `None` when the goal cannot be reached.
pub fn dijkstra_cost(
    map: &OccupancyGrid,
    start: Cell,
    goal: Cell,
    rules: &OracleRules,
) -> Option<PathCost> {
    let (min, w, h) = map.extent();
    let inside =
        |c: Cell| c.x >= min.x && c.y >= min.y && c.x < min.x + w as i64 && c.y < min.y + h as i64;
    let r = rules.inflation_cells;
    let mut inflated = std::collections::HashSet::new();
    for (o, _) in map.known().filter(|&(_, s)| s == CellState::Occupied) {
        for dy in -r..=r {
            for dx in -r..=r {
                if within(o.offset(dx, dy), o, r) {
                    inflated.insert(o.offset(dx, dy));
                }
            }
        }
    }
    let state_ok = |c: Cell| match map.get(c) {
        CellState::Free => true,
        CellState::Unknown => rules.unknown_is_free,
        CellState::Occupied => false,
    };
    let enterable = |c: Cell| {
        if !inside(c) || !state_ok(c) || rules.blocked.contains(&c) {
            return false;
        }
        within(c, start, r) || within(c, goal, r) || !inflated.contains(&c)
    };
    if !inside(start)
        || !(rules.force_start || (state_ok(start) && !rules.blocked.contains(&start)))
    {
        return None;
    }
    if start == goal {
        return Some(PathCost::ZERO);
    }
    let mut graph: DiGraph<Cell, PathCost> = DiGraph::new();
    let mut index: HashMap<Cell, NodeIndex> = HashMap::new();
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let c = min.offset(x, y);
            if c == start || enterable(c) {
                index.insert(c, graph.add_node(c));
            }
        }
    }
    let nodes: Vec<(Cell, NodeIndex)> = index.iter().map(|(&c, &i)| (c, i)).collect();
    for (c, i) in nodes {
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let n = c.offset(dx, dy);
                if n == start || !enterable(n) {
                    continue;
                }
                let w = if dx != 0 && dy != 0 {
                    PathCost::DIAGONAL
                } else {
                    PathCost::STRAIGHT
                };
                graph.add_edge(i, index[&n], w);
            }
        }
    }
    let g = *index.get(&goal)?;
    dijkstra(&graph, index[&start], Some(g), |e| *e.weight())
        .get(&g)
        .copied()
}

/// A `size × size` map anchored at cell (0, 0): random rectangles of
/// obstacles on free space, with a few unknown patches.
pub fn random_map<R: Rng>(rng: &mut R, size: i64) -> OccupancyGrid {
    let mut map = OccupancyGrid::new(0.05);
    let mut states = vec![CellState::Free; (size * size) as usize];
    let mut paint = |rng: &mut R, state: CellState, count: usize, max_side: i64| {
        for _ in 0..count {
            let (x0, y0) = (rng.random_range(0..size), rng.random_range(0..size));
            let (bw, bh) = (
                rng.random_range(1..=max_side),
                rng.random_range(1..=max_side),
            );
            for y in y0..(y0 + bh).min(size) {
                for x in x0..(x0 + bw).min(size) {
                    states[(y * size + x) as usize] = state;
                }
            }
        }
    };
    let walls = rng.random_range(4..20);
    paint(rng, CellState::Occupied, walls, 12);
    let holes = rng.random_range(0..6);
    paint(rng, CellState::Unknown, holes, 10);
    for y in 0..size {
        for x in 0..size {
            let s = states[(y * size + x) as usize];
            if s.is_known() {
                map.set(Cell::new(x, y), s);
            }
        }
    }
    map.ensure_contains(Cell::new(0, 0), Cell::new(size - 1, size - 1));
    map
}

/// A random planning query between two cells of the map, with its oracle
/// restatement.
pub fn random_query<R: Rng>(
    rng: &mut R,
    map: &OccupancyGrid,
    size: i64,
) -> (PlanQuery, OracleRules) {
    let res = map.resolution();
    let pick = |rng: &mut R| {
        for _ in 0..1000 {
            let c = Cell::new(rng.random_range(0..size), rng.random_range(0..size));
            if map.get(c) == CellState::Free {
                return c;
            }
        }
        Cell::new(rng.random_range(0..size), rng.random_range(0..size))
    };
    let (start, goal) = (pick(rng), pick(rng));
    let inflation_cells = rng.random_range(0..=3i64);
    let blocked: Vec<Cell> = (0..rng.random_range(0..4))
        .map(|_| Cell::new(rng.random_range(0..size), rng.random_range(0..size)))
        .collect();
    let unknown_is_free = rng.random_bool(0.5);
    let force_start = rng.random_bool(0.3);
    let mut q = PlanQuery::new(start.center(res), goal.center(res))
        .unknown_is_free(unknown_is_free)
        .inflation_radius(inflation_cells as f64 * res);
    q.rules.blocked = blocked.clone();
    q.rules.force_start = force_start;
    let rules = OracleRules {
        unknown_is_free,
        inflation_cells,
        blocked,
        force_start,
    };
    (q, rules)
}
