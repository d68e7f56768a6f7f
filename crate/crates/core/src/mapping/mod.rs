//! The agent's trinary occupancy map.
//!
//! The grid is world-anchored: cell `(i, j)` covers the same square of world
//! space as floorplan cell `(i, j)` when resolutions match, and it grows in any
//! direction as scans reach new space. Estimated-pose drift therefore shows up
//! as misregistration against the floorplan, never as a shifted origin.

mod crop;
mod pgm;

use serde::{Deserialize, Serialize};

use crate::geom::{Cell, Point};
use crate::kinematics::{KinematicsError, Pose};
use crate::raycast::GridRay;
use crate::sensor::{ray_angles, render_scan, DepthScan, SensorConfig};
use crate::world::{Floorplan, WorldMode, DEFAULT_RESOLUTION};

pub use crop::{ego_crops, fine_ego_crop, CropGrid, EgoCrops, CROP_CELLS, CROP_CENTER};

/// Extra cells allocated around the requested region when the grid grows.
const GROW_PAD: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[repr(u8)]
pub enum CellState {
    #[default]
    Unknown,
    Free,
    Occupied,
}

impl CellState {
    pub fn is_known(self) -> bool {
        self != CellState::Unknown
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    resolution: f64,
    /// World cell index of array element (0, 0).
    min: Cell,
    width: usize,
    height: usize,
    cells: Vec<CellState>,
    free: usize,
    occupied: usize,
    revision: u64,
}

impl Default for OccupancyGrid {
    fn default() -> Self {
        Self::new(DEFAULT_RESOLUTION)
    }
}

impl OccupancyGrid {
    pub fn new(resolution: f64) -> Self {
        Self {
            resolution,
            min: Cell::new(0, 0),
            width: 0,
            height: 0,
            cells: Vec::new(),
            free: 0,
            occupied: 0,
            revision: 0,
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// World coordinates of the corner of array cell (0, 0).
    pub fn origin(&self) -> Point {
        Point::new(
            self.min.x as f64 * self.resolution,
            self.min.y as f64 * self.resolution,
        )
    }

    /// Allocated extent as `(min cell, width, height)`.
    pub fn extent(&self) -> (Cell, usize, usize) {
        (self.min, self.width, self.height)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.x >= self.min.x
            && cell.y >= self.min.y
            && cell.x < self.min.x + self.width as i64
            && cell.y < self.min.y + self.height as i64
    }

    fn index(&self, cell: Cell) -> Option<usize> {
        self.contains(cell)
            .then(|| (cell.y - self.min.y) as usize * self.width + (cell.x - self.min.x) as usize)
    }

    /// State of any cell; cells outside the allocation are Unknown.
    pub fn get(&self, cell: Cell) -> CellState {
        self.index(cell)
            .map_or(CellState::Unknown, |i| self.cells[i])
    }

    /// First cell column and states of allocated row `y`.
    pub fn row(&self, y: i64) -> Option<(i64, &[CellState])> {
        if self.width == 0 || y < self.min.y || y >= self.min.y + self.height as i64 {
            return None;
        }
        let at = (y - self.min.y) as usize * self.width;
        Some((self.min.x, &self.cells[at..at + self.width]))
    }

    pub fn cell_at(&self, p: Point) -> Cell {
        Cell::containing(p, self.resolution)
    }

    /// Number of Free plus Occupied cells.
    pub fn known_cells(&self) -> usize {
        self.free + self.occupied
    }

    pub fn free_cells(&self) -> usize {
        self.free
    }

    pub fn occupied_cells(&self) -> usize {
        self.occupied
    }

    /// Incremented whenever any cell changes state.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Iterates known cells with their states.
    pub fn known(&self) -> impl Iterator<Item = (Cell, CellState)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|&(_i, &s)| s.is_known())
            .map(|(i, &s)| {
                let x = self.min.x + (i % self.width) as i64;
                let y = self.min.y + (i / self.width) as i64;
                (Cell::new(x, y), s)
            })
    }

    /// Grows the allocation so that the inclusive box `lo..=hi` is covered.
    pub fn ensure_contains(&mut self, lo: Cell, hi: Cell) {
        if self.width > 0 && self.contains(lo) && self.contains(hi) {
            return;
        }
        let (new_lo, new_hi) = if self.width == 0 {
            (
                lo.offset(-GROW_PAD, -GROW_PAD),
                hi.offset(GROW_PAD, GROW_PAD),
            )
        } else {
            let cur_hi = self
                .min
                .offset(self.width as i64 - 1, self.height as i64 - 1);
            let pad = |needed: bool| if needed { GROW_PAD } else { 0 };
            (
                Cell::new(
                    self.min.x.min(lo.x - pad(lo.x < self.min.x)),
                    self.min.y.min(lo.y - pad(lo.y < self.min.y)),
                ),
                Cell::new(
                    cur_hi.x.max(hi.x + pad(hi.x > cur_hi.x)),
                    cur_hi.y.max(hi.y + pad(hi.y > cur_hi.y)),
                ),
            )
        };
        let width = (new_hi.x - new_lo.x + 1) as usize;
        let height = (new_hi.y - new_lo.y + 1) as usize;
        let mut cells = vec![CellState::Unknown; width * height];
        for row in 0..self.height {
            let src = row * self.width;
            let dst = (row as i64 + self.min.y - new_lo.y) as usize * width
                + (self.min.x - new_lo.x) as usize;
            cells[dst..dst + self.width].copy_from_slice(&self.cells[src..src + self.width]);
        }
        self.min = new_lo;
        self.width = width;
        self.height = height;
        self.cells = cells;
    }

    /// Writes a Free or Occupied state, growing the grid if needed.
    pub fn set(&mut self, cell: Cell, state: CellState) {
        debug_assert!(state.is_known(), "cells never return to Unknown");
        if !state.is_known() {
            return;
        }
        self.ensure_contains(cell, cell);
        let i = self
            .index(cell)
            .expect("grid was grown to contain the cell");
        let old = self.cells[i];
        if old == state {
            return;
        }
        match old {
            CellState::Free => self.free -= 1,
            CellState::Occupied => self.occupied -= 1,
            CellState::Unknown => {}
        }
        match state {
            CellState::Free => self.free += 1,
            CellState::Occupied => self.occupied += 1,
            CellState::Unknown => unreachable!(),
        }
        self.cells[i] = state;
        self.revision += 1;
    }
}

/// Cells swept by one ray: those it passes through before the hit become
/// Free, and the cell holding the hit point (if any) becomes Occupied.
///
/// A hit point on a cell boundary belongs to the cell the ray enters there.
/// Cells the ray only touches at a corner are skipped, as the sensor skips
/// them.
pub fn trace_ray_cells(
    origin: Point,
    heading_rad: f64,
    resolution: f64,
    depth: f64,
    clipped: bool,
    free: &mut Vec<Cell>,
) -> Option<Cell> {
    for span in GridRay::new(origin, heading_rad, resolution) {
        if span.is_corner_touch() {
            continue;
        }
        if clipped {
            if span.t_enter >= depth {
                return None;
            }
        } else if span.t_exit > depth {
            return Some(span.cell);
        }
        free.push(span.cell);
    }
    unreachable!("grid rays are unbounded")
}

/// Integrates one scan taken at `est_pose` into the map.
///
/// Within a call Occupied wins over Free; across calls the latest write wins.
pub fn integrate(map: &mut OccupancyGrid, est_pose: Pose, scan: &DepthScan, cfg: &SensorConfig) {
    let origin = est_pose.position();
    let res = map.resolution();
    let reach = cfg.max_range + 2.0 * res;
    map.ensure_contains(
        Cell::containing(Point::new(origin.x - reach, origin.y - reach), res),
        Cell::containing(Point::new(origin.x + reach, origin.y + reach), res),
    );
    let mut free = Vec::with_capacity(cfg.n_rays * 64);
    let mut hits = Vec::with_capacity(cfg.n_rays);
    for (i, angle) in ray_angles(cfg).into_iter().enumerate() {
        let heading = (est_pose.theta + angle).to_radians();
        if let Some(hit) = trace_ray_cells(
            origin,
            heading,
            res,
            scan.depths[i],
            scan.clipped[i],
            &mut free,
        ) {
            hits.push(hit);
        }
    }
    for cell in free {
        map.set(cell, CellState::Free);
    }
    for cell in hits {
        map.set(cell, CellState::Occupied);
    }
}

/// Known area in square meters.
pub fn coverage(map: &OccupancyGrid) -> f64 {
    map.known_cells() as f64 * map.resolution() * map.resolution()
}

/// Map built from scans rendered at the true poses of a trajectory.
pub fn true_coverage_map(
    plan: &Floorplan,
    mode: WorldMode,
    trajectory: &[Pose],
    cfg: &SensorConfig,
) -> Result<OccupancyGrid, KinematicsError> {
    let mut map = OccupancyGrid::new(plan.resolution());
    for &pose in trajectory {
        let scan = render_scan(plan, mode, pose, cfg)?;
        integrate(&mut map, pose, &scan, cfg);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::CellKind;

    fn room(w: usize, h: usize) -> Floorplan {
        let mut cells = vec![CellKind::Wall; w * h];
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                cells[y * w + x] = CellKind::Free;
            }
        }
        Floorplan::new("room", w, h, 0.05, cells).unwrap()
    }

    #[test]
    fn fresh_map_has_zero_coverage() {
        assert_eq!(coverage(&OccupancyGrid::default()), 0.0);
    }

    #[test]
    fn coverage_arithmetic() {
        let mut map = OccupancyGrid::new(0.05);
        for i in 0..100 {
            map.set(Cell::new(i, 0), CellState::Free);
        }
        for i in 0..50 {
            map.set(Cell::new(i, 1), CellState::Occupied);
        }
        assert!((coverage(&map) - 0.375).abs() < 1e-12);
    }

    #[test]
    fn clipped_scan_gives_free_wedge() {
        let cfg = SensorConfig::default();
        let scan = DepthScan {
            depths: vec![3.0; 61],
            clipped: vec![true; 61],
        };
        let mut map = OccupancyGrid::new(0.05);
        integrate(&mut map, Pose::new(0.0, 0.0, 0.0), &scan, &cfg);
        assert_eq!(map.occupied_cells(), 0);
        assert!(map.free_cells() > 1000);
        // cells behind the agent stay unknown
        assert_eq!(map.get(Cell::new(-10, 0)), CellState::Unknown);
        assert_eq!(map.get(Cell::new(40, 0)), CellState::Free);
    }

    #[test]
    fn wall_one_meter_ahead() {
        // wall column 41 starts at x = 2.05
        let plan = room(42, 40);
        let pose = Pose::new(1.05, 1.025, 0.0);
        let cfg = SensorConfig::default();
        let scan = render_scan(&plan, WorldMode::MATCHED, pose, &cfg).unwrap();
        let mut map = OccupancyGrid::new(0.05);
        integrate(&mut map, pose, &scan, &cfg);
        // center ray: cells x = 21..=40 on row 20 free, x = 41 occupied
        for x in 21..=40 {
            assert_eq!(map.get(Cell::new(x, 20)), CellState::Free, "x = {x}");
        }
        assert_eq!(map.get(Cell::new(41, 20)), CellState::Occupied);
        assert_eq!(map.get(Cell::new(42, 20)), CellState::Unknown);
    }

    #[test]
    fn integration_is_idempotent() {
        let plan = room(80, 60);
        let pose = Pose::new(1.3, 1.1, 33.0);
        let cfg = SensorConfig::default();
        let scan = render_scan(&plan, WorldMode::MATCHED, pose, &cfg).unwrap();
        let mut once = OccupancyGrid::new(0.05);
        integrate(&mut once, pose, &scan, &cfg);
        let mut twice = once.clone();
        integrate(&mut twice, pose, &scan, &cfg);
        assert_eq!(
            once.known().collect::<Vec<_>>(),
            twice.known().collect::<Vec<_>>()
        );
        assert_eq!(once.known_cells(), twice.known_cells());
    }

    #[test]
    fn off_boundary_hit_lands_in_containing_cell() {
        let mut free = Vec::new();
        let hit = trace_ray_cells(Point::new(0.025, 0.025), 0.0, 0.05, 0.11, false, &mut free);
        // hit point x = 0.135 lies in cell 2
        assert_eq!(hit, Some(Cell::new(2, 0)));
        assert_eq!(free, vec![Cell::new(0, 0), Cell::new(1, 0)]);
    }

    #[test]
    fn grid_growth_preserves_cells() {
        let mut map = OccupancyGrid::new(0.05);
        map.set(Cell::new(3, 4), CellState::Occupied);
        map.set(Cell::new(-500, 700), CellState::Free);
        assert_eq!(map.get(Cell::new(3, 4)), CellState::Occupied);
        assert_eq!(map.get(Cell::new(-500, 700)), CellState::Free);
        assert_eq!(map.known_cells(), 2);
    }

    #[test]
    fn true_map_of_single_pose_matches_integrate() {
        let plan = room(80, 60);
        let pose = Pose::new(2.0, 1.5, 200.0);
        let cfg = SensorConfig::default();
        let truth = true_coverage_map(&plan, WorldMode::MATCHED, &[pose], &cfg).unwrap();
        let mut map = OccupancyGrid::new(0.05);
        integrate(
            &mut map,
            pose,
            &render_scan(&plan, WorldMode::MATCHED, pose, &cfg).unwrap(),
            &cfg,
        );
        assert_eq!(
            truth.known().collect::<Vec<_>>(),
            map.known().collect::<Vec<_>>()
        );
    }
}
