//! Frontier exploration with doors rendered as walls.

use explore_core::eval::{run_episode, sample_pose, EpisodeConfig};
use explore_core::policies::PolicyKind;
use explore_core::seed::rng_for;
use explore_core::world::{generate_house, GenParams, WorldMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = generate_house(8, &GenParams::default())?;
    let start = sample_pose(&plan, &mut rng_for(8, &[0]));
    for policy in [PolicyKind::Frontier, PolicyKind::OracleFrontier] {
        for mode in [WorldMode::MATCHED, WorldMode::DOOR_MISMATCH] {
            let cfg = EpisodeConfig {
                steps: 600,
                mode,
                ..EpisodeConfig::new(policy, start)
            };
            let trace = run_episode(&plan, &cfg)?;
            println!(
                "{:<16} {:<14} {:6.2} m2",
                policy.name(),
                mode.label(),
                trace.final_true_coverage()
            );
        }
    }
    Ok(())
}
