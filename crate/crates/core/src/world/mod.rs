//! Ground-truth environments.
//!
//! A [`Floorplan`] is a closed grid world of `Free`, `Wall` and `Door` cells.
//! Cell `(x, y)` covers `[x·r, (x+1)·r) × [y·r, (y+1)·r)` in world meters, with
//! `y` growing upwards. Floorplans are immutable once constructed and are
//! validated on every construction path (parse, generation, direct).

mod generate;
mod io;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Cell, Point};

pub use generate::{generate_house, GenParams};
pub use io::load_floorplan;

/// Default world resolution in meters per cell.
pub const DEFAULT_RESOLUTION: f64 = 0.05;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid floorplan: {0}")]
    Validation(String),
    #[error("house generation failed: {0}")]
    Generation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Free,
    Wall,
    Door,
}

impl CellKind {
    pub fn symbol(self) -> char {
        match self {
            CellKind::Free => '.',
            CellKind::Wall => '#',
            CellKind::Door => 'D',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '.' => Some(CellKind::Free),
            '#' => Some(CellKind::Wall),
            'D' => Some(CellKind::Door),
            _ => None,
        }
    }

    /// Doors are always passable for collision purposes.
    pub fn is_traversable(self) -> bool {
        !matches!(self, CellKind::Wall)
    }
}

/// How door cells interact with the depth sensor.
///
/// With `door_mismatch` set, doors are rendered (opaque to depth) but still
/// passable, so geometry and affordance disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WorldMode {
    pub door_mismatch: bool,
}

impl WorldMode {
    pub const MATCHED: WorldMode = WorldMode {
        door_mismatch: false,
    };
    pub const DOOR_MISMATCH: WorldMode = WorldMode {
        door_mismatch: true,
    };

    pub fn label(self) -> &'static str {
        if self.door_mismatch {
            "door-mismatch"
        } else {
            "matched"
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Floorplan {
    name: String,
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<CellKind>,
}

impl Floorplan {
    /// Builds a floorplan from row-major cells (row 0 is the bottom row,
    /// `y = 0`) and checks every invariant.
    pub fn new(
        name: impl Into<String>,
        width: usize,
        height: usize,
        resolution: f64,
        cells: Vec<CellKind>,
    ) -> Result<Self, WorldError> {
        if width == 0 || height == 0 {
            return Err(WorldError::Validation("empty grid".into()));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(WorldError::Validation(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if cells.len() != width * height {
            return Err(WorldError::Validation(format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        let plan = Self {
            name: name.into(),
            width,
            height,
            resolution,
            cells,
        };
        plan.validate()?;
        Ok(plan)
    }

    fn validate(&self) -> Result<(), WorldError> {
        for x in 0..self.width {
            for y in [0, self.height - 1] {
                if self.kind(x, y) != CellKind::Wall {
                    return Err(WorldError::Validation(format!(
                        "open boundary at cell ({x}, {y})"
                    )));
                }
            }
        }
        for y in 0..self.height {
            for x in [0, self.width - 1] {
                if self.kind(x, y) != CellKind::Wall {
                    return Err(WorldError::Validation(format!(
                        "open boundary at cell ({x}, {y})"
                    )));
                }
            }
        }
        let Some(seed) = self.cells.iter().position(|&k| k == CellKind::Free) else {
            return Err(WorldError::Validation("no free cell".into()));
        };
        let reached = self.flood_fill(seed);
        let traversable = self.cells.iter().filter(|k| k.is_traversable()).count();
        if reached != traversable {
            return Err(WorldError::Validation(format!(
                "disconnected free space: {reached} of {traversable} traversable cells reachable"
            )));
        }
        Ok(())
    }

    /// Number of traversable cells 4-connected to `seed` (doors count as traversable).
    fn flood_fill(&self, seed: usize) -> usize {
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::from([seed]);
        seen[seed] = true;
        let mut count = 0;
        while let Some(i) = queue.pop_front() {
            count += 1;
            let (x, y) = (i % self.width, i / self.width);
            let mut push = |nx: usize, ny: usize| {
                let j = ny * self.width + nx;
                if !seen[j] && self.cells[j].is_traversable() {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                push(x - 1, y);
            }
            if x + 1 < self.width {
                push(x + 1, y);
            }
            if y > 0 {
                push(x, y - 1);
            }
            if y + 1 < self.height {
                push(x, y + 1);
            }
        }
        count
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    /// Kind of the in-bounds cell at column `x`, row `y`.
    pub fn kind(&self, x: usize, y: usize) -> CellKind {
        self.cells[y * self.width + x]
    }

    /// Kind of a possibly out-of-bounds cell.
    pub fn get(&self, cell: Cell) -> Option<CellKind> {
        if cell.x < 0 || cell.y < 0 {
            return None;
        }
        let (x, y) = (cell.x as usize, cell.y as usize);
        if x >= self.width || y >= self.height {
            return None;
        }
        Some(self.kind(x, y))
    }

    pub fn cell_at(&self, p: Point) -> Cell {
        Cell::containing(p, self.resolution)
    }

    /// Whether a ray stops at this cell. Out-of-bounds cells are opaque.
    pub fn is_opaque(&self, cell: Cell, mode: WorldMode) -> bool {
        match self.get(cell) {
            None | Some(CellKind::Wall) => true,
            Some(CellKind::Door) => mode.door_mismatch,
            Some(CellKind::Free) => false,
        }
    }

    pub fn is_cell_traversable(&self, cell: Cell) -> bool {
        self.get(cell).is_some_and(CellKind::is_traversable)
    }

    pub fn traversable_cell_count(&self) -> usize {
        self.cells.iter().filter(|k| k.is_traversable()).count()
    }

    /// Iterates every traversable cell in row-major order.
    pub fn traversable_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|&(_i, k)| k.is_traversable())
            .map(|(i, _k)| Cell::new((i % self.width) as i64, (i / self.width) as i64))
    }

    /// Traversable cells whose center is strictly farther than `clearance`
    /// meters from every wall cell center.
    pub fn cells_with_clearance(&self, clearance: f64) -> Vec<Cell> {
        let r = (clearance / self.resolution).ceil() as i64;
        let limit = (clearance / self.resolution).powi(2) + 1e-9;
        self.traversable_cells()
            .filter(|c| {
                for dy in -r..=r {
                    for dx in -r..=r {
                        if ((dx * dx + dy * dy) as f64) <= limit
                            && !self.is_cell_traversable(c.offset(dx, dy))
                        {
                            return false;
                        }
                    }
                }
                true
            })
            .collect()
    }
}

/// Whether the point lies in a Free or Door cell. Doors are traversable in
/// both world modes; out-of-bounds points are not.
pub fn is_traversable(plan: &Floorplan, _mode: WorldMode, p: Point) -> bool {
    if !(p.x.is_finite() && p.y.is_finite()) {
        return false;
    }
    plan.is_cell_traversable(plan.cell_at(p))
}

/// Area of Free and Door cells in square meters.
pub fn traversable_area(plan: &Floorplan) -> f64 {
    plan.traversable_cell_count() as f64 * plan.resolution * plan.resolution
}
