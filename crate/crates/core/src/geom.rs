//! Small planar geometry helpers shared by the simulator modules.

use serde::{Deserialize, Serialize};

/// A continuous point in world coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Integer cell coordinates on a world-anchored grid.
///
/// Ordering is lexicographic on `(x, y)` and is used for deterministic
/// tie-breaking throughout the planner and frontier search.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Cell {
    pub x: i64,
    pub y: i64,
}

impl Cell {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    /// Cell containing `p` on a grid of square cells of side `resolution`
    /// anchored at the world origin.
    pub fn containing(p: Point, resolution: f64) -> Self {
        Self {
            x: (p.x / resolution).floor() as i64,
            y: (p.y / resolution).floor() as i64,
        }
    }

    pub fn center(self, resolution: f64) -> Point {
        Point::new(
            (self.x as f64 + 0.5) * resolution,
            (self.y as f64 + 0.5) * resolution,
        )
    }

    pub fn offset(self, dx: i64, dy: i64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn neighbors4(self) -> [Cell; 4] {
        [
            self.offset(1, 0),
            self.offset(-1, 0),
            self.offset(0, 1),
            self.offset(0, -1),
        ]
    }
}

/// Normalizes an angle in degrees into `[0, 360)`.
pub fn normalize_deg(theta: f64) -> f64 {
    let t = theta.rem_euclid(360.0);
    // rem_euclid can return 360.0 for tiny negative inputs
    if t >= 360.0 {
        0.0
    } else {
        t
    }
}

/// Signed angular difference `to - from` wrapped into `(-180, 180]`.
pub fn angle_diff_deg(to: f64, from: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}
