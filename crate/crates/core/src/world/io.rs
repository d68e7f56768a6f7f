//! ASCII floorplan format.
//!
//! ```text
//! EXPLORE-WORLD v1 resolution=0.05 width=5 height=5
//! #####
//! #...#
//! #.D.#
//! #...#
//! #####
//! ```
//!
//! The first grid line is the top row (largest `y`). Every line ends with
//! `\n`; no trailing spaces are allowed.

use std::fmt::Write as _;
use std::path::Path;

use super::{CellKind, Floorplan, WorldError};

const MAGIC: &str = "EXPLORE-WORLD";
const VERSION: &str = "v1";

fn parse_err(line: usize, message: impl Into<String>) -> WorldError {
    WorldError::Parse {
        line,
        message: message.into(),
    }
}

fn header_field<'a>(token: Option<&'a str>, key: &str) -> Result<&'a str, WorldError> {
    let token = token.ok_or_else(|| parse_err(1, format!("missing `{key}=` in header")))?;
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| parse_err(1, format!("expected `{key}=...`, found `{token}`")))
}

impl Floorplan {
    /// Parses the ASCII format. `name` becomes the floorplan identifier.
    pub fn parse(text: &str, name: &str) -> Result<Self, WorldError> {
        let Some(body) = text.strip_suffix('\n') else {
            return Err(parse_err(
                text.lines().count().max(1),
                "file must be newline-terminated",
            ));
        };
        let mut lines = body.split('\n');
        let header = lines
            .next()
            .filter(|h| !h.is_empty())
            .ok_or_else(|| parse_err(1, "missing header"))?;

        let mut tokens = header.split(' ');
        if tokens.next() != Some(MAGIC) || tokens.next() != Some(VERSION) {
            return Err(parse_err(
                1,
                format!("header must start with `{MAGIC} {VERSION}`"),
            ));
        }
        let resolution: f64 = header_field(tokens.next(), "resolution")?
            .parse()
            .map_err(|e| parse_err(1, format!("bad resolution: {e}")))?;
        let width: usize = header_field(tokens.next(), "width")?
            .parse()
            .map_err(|e| parse_err(1, format!("bad width: {e}")))?;
        let height: usize = header_field(tokens.next(), "height")?
            .parse()
            .map_err(|e| parse_err(1, format!("bad height: {e}")))?;
        if let Some(extra) = tokens.next() {
            return Err(parse_err(1, format!("unexpected header token `{extra}`")));
        }

        let rows: Vec<&str> = lines.collect();
        if rows.len() != height {
            return Err(parse_err(
                rows.len() + 1,
                format!("expected {height} rows, found {}", rows.len()),
            ));
        }
        let mut cells = vec![CellKind::Wall; width * height];
        for (k, row) in rows.iter().enumerate() {
            let line = k + 2;
            let y = height - 1 - k;
            let mut count = 0;
            for (x, c) in row.chars().enumerate() {
                let kind = CellKind::from_symbol(c).ok_or_else(|| {
                    parse_err(line, format!("bad character {c:?} at column {}", x + 1))
                })?;
                if x < width {
                    cells[y * width + x] = kind;
                }
                count += 1;
            }
            if count != width {
                return Err(parse_err(
                    line,
                    format!("ragged row: expected {width} characters, found {count}"),
                ));
            }
        }
        Floorplan::new(name, width, height, resolution, cells)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * (self.height + 1) + 64);
        writeln!(
            out,
            "{MAGIC} {VERSION} resolution={} width={} height={}",
            self.resolution, self.width, self.height
        )
        .expect("writing to a String cannot fail");
        for y in (0..self.height).rev() {
            out.extend((0..self.width).map(|x| self.kind(x, y).symbol()));
            out.push('\n');
        }
        out
    }

    /// Loads a floorplan file; the file stem becomes the floorplan name.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "world".to_owned());
        Self::parse(&text, &name)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), WorldError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Loads a floorplan file.
pub fn load_floorplan(path: impl AsRef<Path>) -> Result<Floorplan, WorldError> {
    Floorplan::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROOM: &str =
        "EXPLORE-WORLD v1 resolution=0.05 width=5 height=5\n#####\n#...#\n#...#\n#...#\n#####\n";

    #[test]
    fn parses_smallest_room() {
        let plan = Floorplan::parse(ROOM, "room").unwrap();
        assert_eq!(plan.traversable_cell_count(), 9);
        assert_eq!(plan.to_text(), ROOM);
    }

    #[test]
    fn rejects_bad_character() {
        let text = ROOM.replace("#...#\n#####\n", "#.X.#\n#####\n");
        assert!(matches!(
            Floorplan::parse(&text, "x"),
            Err(WorldError::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn rejects_ragged_rows_and_missing_header() {
        let text = ROOM.replacen("#...#", "#....#", 1);
        assert!(matches!(
            Floorplan::parse(&text, "x"),
            Err(WorldError::Parse { .. })
        ));
        let text = ROOM.split_once('\n').unwrap().1;
        assert!(matches!(
            Floorplan::parse(text, "x"),
            Err(WorldError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Floorplan::parse("", "x"),
            Err(WorldError::Parse { .. })
        ));
        let text = ROOM.trim_end_matches('\n');
        assert!(matches!(
            Floorplan::parse(text, "x"),
            Err(WorldError::Parse { .. })
        ));
        let text = ROOM.replace("height=5", "height=6");
        assert!(matches!(
            Floorplan::parse(&text, "x"),
            Err(WorldError::Parse { .. })
        ));
        let text = ROOM.replacen("#...#", "#... ", 1);
        assert!(matches!(
            Floorplan::parse(&text, "x"),
            Err(WorldError::Parse { .. })
        ));
    }

    #[test]
    fn rows_are_stored_top_down() {
        let text = "EXPLORE-WORLD v1 resolution=0.05 width=4 height=4\n####\n#..#\n#D.#\n####\n";
        // the D is on the second-to-last line, i.e. row y = 1
        let mut text = text.to_owned();
        text = text.replace("#D.#", "#..#").replacen("#..#", "#D.#", 1);
        let plan = Floorplan::parse(&text, "x").unwrap();
        assert_eq!(plan.kind(1, 2), CellKind::Door);
        assert_eq!(plan.kind(1, 1), CellKind::Free);
    }

    #[test]
    fn validation_errors_surface_from_parse() {
        let text = ROOM.replacen("#####", "##.##", 1);
        assert!(matches!(
            Floorplan::parse(&text, "x"),
            Err(WorldError::Validation(_))
        ));
    }
}
