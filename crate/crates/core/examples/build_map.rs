//! Builds an occupancy map from a spin in place and writes it as a PGM.
//!
//! cargo run --release --example build_map -- [out.pgm]

use explore_core::eval::sample_pose;
use explore_core::kinematics::{Action, TURN_ANGLE};
use explore_core::mapping::{coverage, integrate, OccupancyGrid};
use explore_core::seed::rng_for;
use explore_core::sensor::{render_scan, SensorConfig};
use explore_core::world::{generate_house, GenParams, WorldMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "spin.pgm".into());
    let plan = generate_house(11, &GenParams::default())?;
    let cfg = SensorConfig::default();
    let mut pose = sample_pose(&plan, &mut rng_for(11, &[0]));
    let mut map = OccupancyGrid::new(plan.resolution());

    let turns = (360.0 / TURN_ANGLE) as usize;
    for t in 0..turns {
        let scan = render_scan(&plan, WorldMode::MATCHED, pose, &cfg)?;
        integrate(&mut map, pose, &scan, &cfg);
        if t % 10 == 0 {
            println!("turn {t:>2}: {:6.2} m2 known", coverage(&map));
        }
        let (_, _, dtheta) = Action::TurnLeft.displacement();
        pose = pose.compose(0.0, 0.0, dtheta);
    }
    println!(
        "after a full turn: {} free, {} occupied cells, {:.2} m2",
        map.free_cells(),
        map.occupied_cells(),
        coverage(&map)
    );
    map.save_pgm(&out)?;
    println!("wrote {out}");
    Ok(())
}
