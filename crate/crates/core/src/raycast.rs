//! Exact grid traversal (Amanatides–Woo DDA) on a world-anchored square grid.
//!
//! Shared by the depth sensor and the mapper so that both walk identical
//! cell sequences for identical rays.

use crate::geom::{Cell, Point};

/// One visited cell and the ray-parameter interval `[t_enter, t_exit)` (meters)
/// the ray spends inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySpan {
    pub cell: Cell,
    pub t_enter: f64,
    pub t_exit: f64,
}

impl RaySpan {
    /// True when the ray only touches a corner of the cell.
    pub fn is_corner_touch(&self) -> bool {
        self.t_exit <= self.t_enter
    }
}

/// Iterator over the cells pierced by a ray, in order.
///
/// Boundary crossing distances are computed directly from the boundary index
/// rather than accumulated, so errors do not grow with distance. When the ray
/// passes exactly through a grid corner the x step is taken first.
#[derive(Debug, Clone)]
pub struct GridRay {
    origin: Point,
    dir: (f64, f64),
    resolution: f64,
    cell: Cell,
    step: (i64, i64),
    t: f64,
}

impl GridRay {
    /// `heading_rad` is measured counterclockwise from +x.
    pub fn new(origin: Point, heading_rad: f64, resolution: f64) -> Self {
        let (sin, cos) = heading_rad.sin_cos();
        Self::with_direction(origin, (cos, sin), resolution)
    }

    /// `dir` must be a unit vector.
    pub fn with_direction(origin: Point, dir: (f64, f64), resolution: f64) -> Self {
        let step = (
            if dir.0 > 0.0 {
                1
            } else if dir.0 < 0.0 {
                -1
            } else {
                0
            },
            if dir.1 > 0.0 {
                1
            } else if dir.1 < 0.0 {
                -1
            } else {
                0
            },
        );
        Self {
            origin,
            dir,
            resolution,
            cell: Cell::containing(origin, resolution),
            step,
            t: 0.0,
        }
    }

    fn boundary_t(&self, index: i64, origin: f64, dir: f64, step: i64) -> f64 {
        if step == 0 {
            return f64::INFINITY;
        }
        let boundary = if step > 0 { index + 1 } else { index };
        let t = (boundary as f64 * self.resolution - origin) / dir;
        t.max(self.t)
    }
}

impl Iterator for GridRay {
    type Item = RaySpan;

    fn next(&mut self) -> Option<RaySpan> {
        let tx = self.boundary_t(self.cell.x, self.origin.x, self.dir.0, self.step.0);
        let ty = self.boundary_t(self.cell.y, self.origin.y, self.dir.1, self.step.1);
        let span = RaySpan {
            cell: self.cell,
            t_enter: self.t,
            t_exit: tx.min(ty),
        };
        if tx <= ty {
            self.cell.x += self.step.0;
        } else {
            self.cell.y += self.step.1;
        }
        self.t = span.t_exit;
        Some(span)
    }
}
