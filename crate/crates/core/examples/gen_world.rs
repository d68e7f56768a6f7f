//! Generates a small house and prints it as text.
//!
//! cargo run --release --example gen_world -- [seed] [target_area_m2]

use explore_core::world::{generate_house, traversable_area, CellKind, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(Ok(7), |s| s.parse())?;
    let area: f64 = args.next().map_or(Ok(60.0), |s| s.parse())?;

    let plan = generate_house(seed, &GenParams::with_target_area(area))?;
    let doors = plan
        .cells()
        .iter()
        .filter(|&&k| k == CellKind::Door)
        .count();
    println!(
        "seed {seed}: {}x{} cells at {} m, {:.1} m2 traversable, {doors} door cells",
        plan.width(),
        plan.height(),
        plan.resolution(),
        traversable_area(&plan)
    );

    // one character per 4x4 block so the house fits a terminal
    for y in (0..plan.height()).step_by(4).rev() {
        let row: String = (0..plan.width())
            .step_by(4)
            .map(|x| plan.kind(x, y).symbol())
            .collect();
        println!("{row}");
    }
    Ok(())
}
