//! Writes an episode trace as JSON lines, reads it back and checks that a
//! rerun with the same seed matches it.

use explore_core::eval::{read_trace, run_episode, sample_pose, write_trace, EpisodeConfig};
use explore_core::policies::PolicyKind;
use explore_core::seed::rng_for;
use explore_core::world::{generate_house, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = generate_house(12, &GenParams::with_target_area(100.0))?;
    let start = sample_pose(&plan, &mut rng_for(12, &[0]));
    let cfg = EpisodeConfig {
        steps: 120,
        eta: 0.05,
        seed: 99,
        ..EpisodeConfig::new(PolicyKind::Straight, start)
    };

    let mut bytes = Vec::new();
    write_trace(&run_episode(&plan, &cfg)?, &mut bytes)?;
    let replayed = read_trace(bytes.as_slice())?;
    let rerun = run_episode(&plan, &cfg)?;
    println!(
        "{} bytes, {} steps, rerun identical: {}",
        bytes.len(),
        replayed.steps.len(),
        replayed == rerun
    );
    let last = replayed.steps.last().expect("non-empty trace");
    println!(
        "final true pose ({:.2}, {:.2}), estimate ({:.2}, {:.2})",
        last.true_pose.x, last.true_pose.y, last.est_pose.x, last.est_pose.y
    );
    Ok(())
}
