//! Planar depth sensor: a fan of rays over the field of view, traced exactly
//! through the floorplan grid.

use serde::{Deserialize, Serialize};

use crate::geom::Point;
use crate::kinematics::{KinematicsError, Pose};
use crate::raycast::GridRay;
use crate::world::{CellKind, Floorplan, WorldMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Field of view in degrees, in `(0, 360]`.
    pub fov: f64,
    /// Number of rays, at least 2.
    pub n_rays: usize,
    /// Depth clip in meters.
    pub max_range: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov: 60.0,
            n_rays: 61,
            max_range: 3.0,
        }
    }
}

impl SensorConfig {
    pub fn is_valid(&self) -> bool {
        self.fov > 0.0 && self.fov <= 360.0 && self.n_rays >= 2 && self.max_range > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthScan {
    pub depths: Vec<f64>,
    pub clipped: Vec<bool>,
}

/// Ray angles in degrees relative to the heading, evenly spaced over
/// `[-fov/2, +fov/2]` with both endpoints included. Index 0 is the rightmost ray.
pub fn ray_angles(cfg: &SensorConfig) -> Vec<f64> {
    let n = cfg.n_rays;
    let half = cfg.fov / 2.0;
    (0..n)
        .map(|i| -half + cfg.fov * i as f64 / (n - 1) as f64)
        .collect()
}

/// Distance along a ray to the first opaque cell, or `None` if nothing is hit
/// within `max_range`. Rays starting inside a door pass through the door
/// cells they meet before their first non-door cell: an agent standing in a
/// rendered door sees out of it.
pub fn cast_ray(
    plan: &Floorplan,
    mode: WorldMode,
    origin: Point,
    heading_rad: f64,
    max_range: f64,
) -> Option<f64> {
    let mut leaving_door = plan.get(plan.cell_at(origin)) == Some(CellKind::Door);
    for span in GridRay::new(origin, heading_rad, plan.resolution()) {
        if span.t_enter > max_range {
            return None;
        }
        if span.is_corner_touch() {
            continue;
        }
        if leaving_door {
            if plan.get(span.cell) == Some(CellKind::Door) {
                continue;
            }
            leaving_door = false;
        }
        if plan.is_opaque(span.cell, mode) {
            return Some(span.t_enter);
        }
    }
    unreachable!("grid rays are unbounded")
}

/// Renders one depth scan from the true pose.
pub fn render_scan(
    plan: &Floorplan,
    mode: WorldMode,
    pose: Pose,
    cfg: &SensorConfig,
) -> Result<DepthScan, KinematicsError> {
    let origin = pose.position();
    if !plan.is_cell_traversable(plan.cell_at(origin)) {
        return Err(KinematicsError::InvalidState {
            x: pose.x,
            y: pose.y,
        });
    }
    let mut depths = Vec::with_capacity(cfg.n_rays);
    let mut clipped = Vec::with_capacity(cfg.n_rays);
    for angle in ray_angles(cfg) {
        let heading = (pose.theta + angle).to_radians();
        match cast_ray(plan, mode, origin, heading, cfg.max_range) {
            // a pose sitting exactly on the face of an opaque cell sees it at distance 0
            Some(d) => {
                depths.push(d.max(f64::MIN_POSITIVE));
                clipped.push(false);
            }
            None => {
                depths.push(cfg.max_range);
                clipped.push(true);
            }
        }
    }
    Ok(DepthScan { depths, clipped })
}
