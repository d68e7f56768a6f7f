//! Per-step intrinsic reward: turn toward open space, then walk.

use explore_core::eval::sample_pose;
use explore_core::kinematics::{step, Action, NoiseConfig, Pose};
use explore_core::mapping::{integrate, OccupancyGrid};
use explore_core::rewards::{step_reward, RewardConfig};
use explore_core::seed::rng_for;
use explore_core::sensor::{render_scan, DepthScan, SensorConfig};
use explore_core::world::{generate_house, Floorplan, GenParams, WorldMode};

struct Walker<'a> {
    plan: &'a Floorplan,
    sensor: SensorConfig,
    map: OccupancyGrid,
    true_pose: Pose,
    est_pose: Pose,
    scan: DepthScan,
    total: f64,
}

impl Walker<'_> {
    fn act(&mut self, t: usize, action: Action) -> Result<(), Box<dyn std::error::Error>> {
        let mode = WorldMode::MATCHED;
        let mut rng = rng_for(0, &[]);
        let out = step(
            self.plan,
            mode,
            self.true_pose,
            self.est_pose,
            action,
            &NoiseConfig::noiseless(),
            &mut rng,
        )?;
        (self.true_pose, self.est_pose) = (out.true_pose, out.est_pose);
        let before = self.map.clone();
        self.scan = render_scan(self.plan, mode, self.true_pose, &self.sensor)?;
        integrate(&mut self.map, self.est_pose, &self.scan, &self.sensor);
        let r = step_reward(&before, &self.map, out.bump, &RewardConfig::default())?;
        self.total += r.total;
        println!(
            "t={t:>2} {:<9} new cells {:>4} bump {:>2} reward {:+.4}",
            format!("{action:?}"),
            r.cov_term,
            r.coll_term,
            r.total
        );
        Ok(())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = generate_house(5, &GenParams::default())?;
    let sensor = SensorConfig::default();
    let start = sample_pose(&plan, &mut rng_for(5, &[0]));
    let scan = render_scan(&plan, WorldMode::MATCHED, start, &sensor)?;
    let mut map = OccupancyGrid::new(plan.resolution());
    integrate(&mut map, start, &scan, &sensor);
    let mut w = Walker {
        plan: &plan,
        sensor,
        map,
        true_pose: start,
        est_pose: start,
        scan,
        total: 0.0,
    };

    let mut t = 1;
    // turn until the center ray sees open space
    while !w.scan.clipped[sensor.n_rays / 2] && t <= 40 {
        w.act(t, Action::TurnLeft)?;
        t += 1;
    }
    for _ in 0..12 {
        w.act(t, Action::Forward)?;
        t += 1;
    }
    println!("return {:.4}", w.total);
    Ok(())
}
