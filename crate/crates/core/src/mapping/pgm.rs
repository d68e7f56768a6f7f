//! Plain PGM (`P2`) map snapshots: 0 = Unknown, 128 = Occupied, 255 = Free.
//! The top image row is the largest `y`.

use std::fmt::Write as _;
use std::path::Path;

use super::{CellState, OccupancyGrid};
use crate::geom::{Cell, Point};

fn pixel(state: CellState) -> u8 {
    match state {
        CellState::Unknown => 0,
        CellState::Occupied => 128,
        CellState::Free => 255,
    }
}

impl OccupancyGrid {
    /// Renders the allocated extent as an ASCII PGM. The comment line records
    /// the world coordinates of the bottom-left corner and the resolution.
    pub fn to_pgm(&self) -> String {
        let (min, width, height) = self.extent();
        let origin = self.origin();
        let mut out = String::with_capacity(width * height * 4 + 128);
        out.push_str("P2\n");
        writeln!(
            out,
            "# origin={},{} resolution={}",
            origin.x,
            origin.y,
            self.resolution()
        )
        .unwrap();
        writeln!(out, "{width} {height}\n255").unwrap();
        for row in (0..height as i64).rev() {
            let line: Vec<String> = (0..width as i64)
                .map(|col| pixel(self.get(Cell::new(min.x + col, min.y + row))).to_string())
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_pgm())
    }

    /// Parses a snapshot written by [`OccupancyGrid::to_pgm`].
    pub fn from_pgm(text: &str) -> Option<OccupancyGrid> {
        let mut lines = text.lines();
        if lines.next()? != "P2" {
            return None;
        }
        let comment = lines.next()?.strip_prefix("# origin=")?;
        let (origin, res) = comment.split_once(" resolution=")?;
        let (ox, oy) = origin.split_once(',')?;
        let origin = Point::new(ox.parse().ok()?, oy.parse().ok()?);
        let resolution: f64 = res.parse().ok()?;
        let mut dims = lines.next()?.split_whitespace();
        let width: i64 = dims.next()?.parse().ok()?;
        let height: i64 = dims.next()?.parse().ok()?;
        if lines.next()? != "255" {
            return None;
        }
        let min = Cell::new(
            (origin.x / resolution).round() as i64,
            (origin.y / resolution).round() as i64,
        );
        if width <= 0 || height <= 0 {
            return None;
        }
        let mut map = OccupancyGrid::new(resolution);
        map.min = min;
        map.width = width as usize;
        map.height = height as usize;
        map.cells = vec![CellState::Unknown; (width * height) as usize];
        for (k, line) in lines.enumerate().take(height as usize) {
            let row = height - 1 - k as i64;
            for (col, v) in line.split_whitespace().enumerate() {
                let state = match v {
                    "0" => continue,
                    "128" => CellState::Occupied,
                    "255" => CellState::Free,
                    _ => return None,
                };
                map.set(min.offset(col as i64, row), state);
            }
        }
        Some(map)
    }
}
