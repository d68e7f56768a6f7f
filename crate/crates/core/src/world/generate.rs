//! Procedural houses: rectangular rooms on a coarse block lattice, joined by
//! corridors, with every room–corridor junction stamped with door cells.
//!
//! The lattice block side equals the corridor width. Rooms occupy whole
//! blocks (their walls live inside the block footprint), corridors are whole
//! free blocks routed by BFS around rooms, and the outer frame is solid wall.
//! Rooms are therefore entered only through doors.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{traversable_area, CellKind, Floorplan, WorldError, DEFAULT_RESOLUTION};

/// Wall thickness in cells for room walls and the outer frame.
const WALL: usize = 3;
const MAX_ATTEMPTS: usize = 400;
const PLACEMENT_TRIES: usize = 300;
/// Fraction of the target area assigned to room interiors.
const ROOM_SHARE: f64 = 0.78;
/// Lattice area relative to the target area.
const CANVAS_SLACK: f64 = 2.0;
const AREA_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// Desired traversable area in square meters, within `[20, 2000]`.
    pub target_area: f64,
    /// Inclusive range of room counts.
    pub room_count_range: (usize, usize),
    /// Corridor width in cells (also the lattice block side).
    pub corridor_width: usize,
    /// Door width in cells along the wall.
    pub door_width: usize,
    pub resolution: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            target_area: 328.0,
            room_count_range: (4, 8),
            corridor_width: 24,
            door_width: 16,
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl GenParams {
    pub fn with_target_area(target_area: f64) -> Self {
        Self {
            target_area,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::Generation(m));
        if !(20.0..=2000.0).contains(&self.target_area) {
            return bad(format!(
                "target_area {} outside [20, 2000] m²",
                self.target_area
            ));
        }
        let (lo, hi) = self.room_count_range;
        if lo == 0 || lo > hi {
            return bad(format!("invalid room_count_range ({lo}, {hi})"));
        }
        if self.corridor_width < 2 * WALL + 2 {
            return bad(format!(
                "corridor_width must be at least {} cells",
                2 * WALL + 2
            ));
        }
        if self.door_width == 0 || self.door_width + 2 * WALL > self.corridor_width {
            return bad(format!(
                "door_width must be in [1, corridor_width - {}]",
                2 * WALL
            ));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return bad("resolution must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Room {
    bx: usize,
    by: usize,
    bw: usize,
    bh: usize,
}

impl Room {
    fn contains(&self, bx: usize, by: usize) -> bool {
        bx >= self.bx && bx < self.bx + self.bw && by >= self.by && by < self.by + self.bh
    }

    fn overlaps(&self, other: &Room) -> bool {
        self.bx < other.bx + other.bw
            && other.bx < self.bx + self.bw
            && self.by < other.by + other.bh
            && other.by < self.by + self.bh
    }

    /// Lattice blocks sharing an edge with the room, in a fixed order.
    fn adjacent_blocks(&self, nx: usize, ny: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for bx in self.bx..self.bx + self.bw {
            if self.by > 0 {
                out.push((bx, self.by - 1));
            }
            if self.by + self.bh < ny {
                out.push((bx, self.by + self.bh));
            }
        }
        for by in self.by..self.by + self.bh {
            if self.bx > 0 {
                out.push((self.bx - 1, by));
            }
            if self.bx + self.bw < nx {
                out.push((self.bx + self.bw, by));
            }
        }
        out
    }
}

struct Layout {
    nx: usize,
    ny: usize,
    rooms: Vec<Room>,
    corridor: Vec<bool>,
    /// (room index, adjacent corridor block)
    doors: Vec<(usize, (usize, usize))>,
}

/// Generates a house. Pure function of `(seed, params)`.
pub fn generate_house(seed: u64, params: &GenParams) -> Result<Floorplan, WorldError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = params.target_area;
    for _ in 0..MAX_ATTEMPTS {
        let Some(layout) = try_layout(&mut rng, params) else {
            continue;
        };
        let plan = rasterize(&layout, params, format!("house-{seed}"))?;
        let area = traversable_area(&plan);
        if (area - target).abs() <= AREA_TOLERANCE * target {
            return Ok(plan);
        }
    }
    Err(WorldError::Generation(format!(
        "no layout within ±{}% of {target} m² after {MAX_ATTEMPTS} attempts",
        AREA_TOLERANCE * 100.0
    )))
}

fn try_layout(rng: &mut ChaCha8Rng, params: &GenParams) -> Option<Layout> {
    let block_m = params.corridor_width as f64 * params.resolution;
    let block_area = block_m * block_m;
    let target = params.target_area;

    // a 2x2-block room is the smallest allowed
    let min_room_area = (2.0 * block_m - 2.0 * WALL as f64 * params.resolution).powi(2);
    let max_rooms = ((ROOM_SHARE * target / min_room_area).floor() as usize).max(1);
    let (lo, hi) = params.room_count_range;
    let n_rooms = rng.random_range(lo..=hi).min(max_rooms);

    let lattice_blocks = CANVAS_SLACK * target / block_area;
    let aspect: f64 = rng.random_range(0.75..1.333);
    let nx = ((lattice_blocks * aspect).sqrt().round() as usize).max(3);
    let ny = ((lattice_blocks / aspect).sqrt().round() as usize).max(3);

    let room_area = ROOM_SHARE * target / n_rooms as f64;
    let side_blocks = (room_area.sqrt() / block_m).max(2.0);
    let lo_side = ((side_blocks * 0.7).round() as usize).max(2);
    let hi_side = ((side_blocks * 1.3).round() as usize).max(lo_side);

    let mut rooms: Vec<Room> = Vec::with_capacity(n_rooms);
    for _ in 0..n_rooms {
        let mut placed = false;
        for _ in 0..PLACEMENT_TRIES {
            let bw = rng.random_range(lo_side..=hi_side).min(nx);
            let bh = rng.random_range(lo_side..=hi_side).min(ny);
            let room = Room {
                bx: rng.random_range(0..=nx - bw),
                by: rng.random_range(0..=ny - bh),
                bw,
                bh,
            };
            if rooms.iter().all(|r| !r.overlaps(&room)) {
                rooms.push(room);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }

    let in_room = |bx: usize, by: usize| rooms.iter().any(|r| r.contains(bx, by));
    let mut corridor = vec![false; nx * ny];
    let mut doors = Vec::with_capacity(rooms.len());

    let mut first: Vec<_> = rooms[0]
        .adjacent_blocks(nx, ny)
        .into_iter()
        .filter(|&(bx, by)| !in_room(bx, by))
        .collect();
    first.shuffle(rng);
    let start = *first.first()?;
    corridor[start.1 * nx + start.0] = true;
    doors.push((0, start));

    for (i, room) in rooms.iter().enumerate().skip(1) {
        let targets = room.adjacent_blocks(nx, ny);
        let (path, door) = route_to_network(nx, ny, &corridor, &in_room, &targets)?;
        for (bx, by) in path {
            corridor[by * nx + bx] = true;
        }
        doors.push((i, door));
    }

    Some(Layout {
        nx,
        ny,
        rooms,
        corridor,
        doors,
    })
}

/// Corridor blocks to carve, and the block that becomes the door.
type Route = (Vec<(usize, usize)>, (usize, usize));

/// BFS over non-room blocks from the corridor network until a block adjacent
/// to the room is reached.
fn route_to_network(
    nx: usize,
    ny: usize,
    corridor: &[bool],
    in_room: &impl Fn(usize, usize) -> bool,
    targets: &[(usize, usize)],
) -> Option<Route> {
    let mut is_target = vec![false; nx * ny];
    for &(bx, by) in targets {
        if !in_room(bx, by) {
            is_target[by * nx + bx] = true;
        }
    }
    let mut parent = vec![usize::MAX; nx * ny];
    let mut queue = VecDeque::new();
    for (i, &c) in corridor.iter().enumerate() {
        if c {
            parent[i] = i;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if is_target[i] {
            let mut path = Vec::new();
            let mut j = i;
            while parent[j] != j {
                path.push((j % nx, j / nx));
                j = parent[j];
            }
            return Some((path, (i % nx, i / nx)));
        }
        let (bx, by) = (i % nx, i / nx);
        let mut next = Vec::with_capacity(4);
        if bx > 0 {
            next.push((bx - 1, by));
        }
        if bx + 1 < nx {
            next.push((bx + 1, by));
        }
        if by > 0 {
            next.push((bx, by - 1));
        }
        if by + 1 < ny {
            next.push((bx, by + 1));
        }
        for (x, y) in next {
            let j = y * nx + x;
            if parent[j] == usize::MAX && !in_room(x, y) {
                parent[j] = i;
                queue.push_back(j);
            }
        }
    }
    None
}

fn rasterize(layout: &Layout, params: &GenParams, name: String) -> Result<Floorplan, WorldError> {
    let c = params.corridor_width;
    let width = layout.nx * c + 2 * WALL;
    let height = layout.ny * c + 2 * WALL;
    let mut cells = vec![CellKind::Wall; width * height];
    let mut fill = |x0: usize, y0: usize, x1: usize, y1: usize, kind: CellKind| {
        for y in y0..y1 {
            for x in x0..x1 {
                cells[y * width + x] = kind;
            }
        }
    };
    // block (bx, by) starts at cell (WALL + bx*c, WALL + by*c)
    let origin = |b: usize| WALL + b * c;

    for room in &layout.rooms {
        fill(
            origin(room.bx) + WALL,
            origin(room.by) + WALL,
            origin(room.bx + room.bw) - WALL,
            origin(room.by + room.bh) - WALL,
            CellKind::Free,
        );
    }
    for (i, _) in layout.corridor.iter().enumerate().filter(|(_, &v)| v) {
        let (bx, by) = (i % layout.nx, i / layout.nx);
        fill(
            origin(bx),
            origin(by),
            origin(bx + 1),
            origin(by + 1),
            CellKind::Free,
        );
    }
    let margin = (c - params.door_width) / 2;
    for &(ri, (bx, by)) in &layout.doors {
        let room = layout.rooms[ri];
        let (x0, y0, x1, y1) = if by + 1 == room.by {
            // corridor below the room
            let x = origin(bx) + margin;
            (
                x,
                origin(room.by),
                x + params.door_width,
                origin(room.by) + WALL,
            )
        } else if by == room.by + room.bh {
            let x = origin(bx) + margin;
            let y = origin(room.by + room.bh) - WALL;
            (x, y, x + params.door_width, y + WALL)
        } else if bx + 1 == room.bx {
            let y = origin(by) + margin;
            (
                origin(room.bx),
                y,
                origin(room.bx) + WALL,
                y + params.door_width,
            )
        } else {
            let y = origin(by) + margin;
            let x = origin(room.bx + room.bw) - WALL;
            (x, y, x + WALL, y + params.door_width)
        };
        fill(x0, y0, x1, y1, CellKind::Door);
    }
    Floorplan::new(name, width, height, params.resolution, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let p = GenParams::with_target_area(100.0);
        let a = generate_house(1, &p).unwrap();
        let b = generate_house(1, &p).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let c = generate_house(2, &p).unwrap();
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn area_within_tolerance() {
        let p = GenParams::with_target_area(100.0);
        let plan = generate_house(1, &p).unwrap();
        let area = traversable_area(&plan);
        assert!((80.0..=120.0).contains(&area), "area {area}");
    }

    #[test]
    fn rejects_out_of_range_params() {
        assert!(generate_house(0, &GenParams::with_target_area(5.0)).is_err());
        let p = GenParams {
            door_width: 30,
            ..GenParams::default()
        };
        assert!(matches!(
            generate_house(0, &p),
            Err(WorldError::Generation(_))
        ));
        let p = GenParams {
            room_count_range: (3, 2),
            ..GenParams::default()
        };
        assert!(generate_house(0, &p).is_err());
    }

    #[test]
    fn every_room_has_a_door() {
        let plan = generate_house(7, &GenParams::default()).unwrap();
        assert!(plan.cells().contains(&CellKind::Door));
    }
}
