//! Renders one depth scan, with doors open and with doors rendered shut.

use explore_core::eval::sample_pose;
use explore_core::seed::rng_for;
use explore_core::sensor::{ray_angles, render_scan, SensorConfig};
use explore_core::world::{generate_house, GenParams, WorldMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = generate_house(3, &GenParams::default())?;
    let cfg = SensorConfig::default();
    let mut rng = rng_for(3, &[0]);

    // first sampled pose that faces a door
    let (pose, open, shut) = loop {
        let pose = sample_pose(&plan, &mut rng);
        let open = render_scan(&plan, WorldMode::MATCHED, pose, &cfg)?;
        let shut = render_scan(&plan, WorldMode::DOOR_MISMATCH, pose, &cfg)?;
        if open != shut {
            break (pose, open, shut);
        }
    };

    println!(
        "pose ({:.2}, {:.2}) heading {:.0} deg",
        pose.x, pose.y, pose.theta
    );
    println!("{:>7} {:>8} {:>8}", "ray deg", "matched", "doors");
    let show = |d: f64, clip: bool| {
        if clip {
            format!("{:>8}", "max")
        } else {
            format!("{d:8.3}")
        }
    };
    for (i, a) in ray_angles(&cfg).iter().enumerate().step_by(4) {
        println!(
            "{a:>7.1} {} {}",
            show(open.depths[i], open.clipped[i]),
            show(shut.depths[i], shut.clipped[i])
        );
    }
    Ok(())
}
