//! Dead-reckoning error growth under odometry noise.

use explore_core::eval::{run_episode, sample_pose, EpisodeConfig};
use explore_core::policies::PolicyKind;
use explore_core::seed::rng_for;
use explore_core::world::{generate_house, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = generate_house(4, &GenParams::default())?;
    let checkpoints = [10, 100, 300, 1000];
    println!(
        "{:>5} {}",
        "eta",
        checkpoints
            .map(|t| format!("{:>8}", format!("t={t}")))
            .join("")
    );
    for eta in [0.0, 0.02, 0.05, 0.10] {
        let mut err = [0.0; 4];
        let runs = 10;
        for seed in 0..runs {
            let start = sample_pose(&plan, &mut rng_for(seed, &[0]));
            let cfg = EpisodeConfig {
                eta,
                seed,
                ..EpisodeConfig::new(PolicyKind::Random, start)
            };
            let trace = run_episode(&plan, &cfg)?;
            for (e, t) in err.iter_mut().zip(checkpoints) {
                let s = &trace.steps[t - 1];
                *e += s.est_pose.position().distance(s.true_pose.position()) / runs as f64;
            }
        }
        println!("{eta:>5.2} {}", err.map(|e| format!("{e:>8.3}")).join(""));
    }
    Ok(())
}
