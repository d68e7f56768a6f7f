//! Compares the baseline policies on one world.
//!
//! cargo run --release --example frontier_exploration -- [steps]

use explore_core::eval::{run_episode, sample_pose, EpisodeConfig};
use explore_core::policies::PolicyKind;
use explore_core::seed::rng_for;
use explore_core::world::{generate_house, traversable_area, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let steps: usize = std::env::args().nth(1).map_or(Ok(500), |s| s.parse())?;
    let plan = generate_house(1, &GenParams::default())?;
    let start = sample_pose(&plan, &mut rng_for(1, &[0]));
    println!(
        "world area {:.1} m2, {steps} steps",
        traversable_area(&plan)
    );

    for policy in PolicyKind::ALL {
        let cfg = EpisodeConfig {
            steps,
            ..EpisodeConfig::new(policy, start)
        };
        let trace = run_episode(&plan, &cfg)?;
        let bumps = trace.steps.iter().filter(|s| s.bump).count();
        let at = |t: usize| trace.steps[t.min(steps) - 1].true_coverage_m2;
        println!(
            "{:<16} coverage {:6.2} / {:6.2} / {:6.2} m2 at t={}/{}/{}, {bumps} bumps",
            policy.name(),
            at(steps / 4),
            at(steps / 2),
            at(steps),
            steps / 4,
            steps / 2,
            steps
        );
    }
    Ok(())
}
