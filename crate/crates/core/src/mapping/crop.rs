//! Egocentric map crops: the allocentric map rotated so the agent faces up,
//! centered on the estimated position, at two scales.

use crate::geom::Point;
use crate::kinematics::Pose;

use super::{CellState, OccupancyGrid};

/// Side length of both crops in cells.
pub const CROP_CELLS: usize = 80;
/// Row and column of the crop cell holding the agent.
pub const CROP_CENTER: usize = 40;
/// Fine crop cell size (meters): 80 cells span 4 m.
pub const FINE_CELL: f64 = 0.05;
/// Coarse crop cell size (meters): 80 cells span 40 m.
pub const COARSE_CELL: f64 = 0.5;

/// A square egocentric crop. Row 0 is the far edge ahead of the agent,
/// column 0 is its left edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CropGrid {
    cells: Vec<CellState>,
}

impl CropGrid {
    pub fn get(&self, row: usize, col: usize) -> CellState {
        self.cells[row * CROP_CELLS + col]
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgoCrops {
    /// 40 m × 40 m at 0.5 m per cell.
    pub coarse: CropGrid,
    /// 4 m × 4 m at 0.05 m per cell.
    pub fine: CropGrid,
}

/// Maps egocentric offsets (meters ahead, meters to the right) to world points.
struct EgoFrame {
    origin: Point,
    heading: (f64, f64),
}

impl EgoFrame {
    fn new(pose: Pose) -> Self {
        let (sin, cos) = pose.heading_rad().sin_cos();
        Self {
            origin: pose.position(),
            heading: (cos, sin),
        }
    }

    fn world(&self, ahead: f64, right: f64) -> Point {
        let (c, s) = self.heading;
        Point::new(
            self.origin.x + ahead * c + right * s,
            self.origin.y + ahead * s - right * c,
        )
    }
}

fn offset(index: usize, cell: f64) -> f64 {
    (index as f64 - CROP_CENTER as f64) * cell
}

fn fine_crop(map: &OccupancyGrid, frame: &EgoFrame) -> CropGrid {
    let mut cells = Vec::with_capacity(CROP_CELLS * CROP_CELLS);
    for row in 0..CROP_CELLS {
        let ahead = -offset(row, FINE_CELL);
        for col in 0..CROP_CELLS {
            let p = frame.world(ahead, offset(col, FINE_CELL));
            cells.push(map.get(map.cell_at(p)));
        }
    }
    CropGrid { cells }
}

/// Plurality vote; ties resolve Occupied over Free over Unknown.
fn vote(counts: [usize; 3]) -> CellState {
    let [unknown, free, occupied] = counts;
    if occupied >= free && occupied >= unknown {
        CellState::Occupied
    } else if free >= unknown {
        CellState::Free
    } else {
        CellState::Unknown
    }
}

fn coarse_crop(map: &OccupancyGrid, frame: &EgoFrame) -> CropGrid {
    let sub = (COARSE_CELL / map.resolution()).round().max(1.0) as usize;
    let step = COARSE_CELL / sub as f64;
    let half = (sub as f64 - 1.0) / 2.0;
    let mut cells = Vec::with_capacity(CROP_CELLS * CROP_CELLS);
    for row in 0..CROP_CELLS {
        let ahead = -offset(row, COARSE_CELL);
        for col in 0..CROP_CELLS {
            let right = offset(col, COARSE_CELL);
            let mut counts = [0usize; 3];
            for i in 0..sub {
                for j in 0..sub {
                    let p = frame.world(
                        ahead + (half - i as f64) * step,
                        right + (j as f64 - half) * step,
                    );
                    counts[map.get(map.cell_at(p)) as usize] += 1;
                }
            }
            cells.push(vote(counts));
        }
    }
    CropGrid { cells }
}

/// Both crops, computed from the map and the estimated pose alone.
pub fn ego_crops(map: &OccupancyGrid, est_pose: Pose) -> EgoCrops {
    let frame = EgoFrame::new(est_pose);
    EgoCrops {
        coarse: coarse_crop(map, &frame),
        fine: fine_crop(map, &frame),
    }
}

/// Fine crop only; cheaper when the coarse view is not needed.
pub fn fine_ego_crop(map: &OccupancyGrid, est_pose: Pose) -> CropGrid {
    fine_crop(map, &EgoFrame::new(est_pose))
}
