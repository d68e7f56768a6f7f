//! Point-goal navigation with and without an exploration log.

use explore_core::eval::{
    collect_experience, downstream_navigation, localization_errors, sample_pose, sample_tasks, spl,
    EpisodeConfig, GoalLocalization, NavConfig,
};
use explore_core::policies::PolicyKind;
use explore_core::seed::rng_for;
use explore_core::sensor::SensorConfig;
use explore_core::world::{generate_house, GenParams, WorldMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = generate_house(2000, &GenParams::default())?;
    let mode = WorldMode::MATCHED;
    let start = sample_pose(&plan, &mut rng_for(0, &[1]));
    let log = collect_experience(
        &plan,
        &EpisodeConfig {
            steps: 1000,
            ..EpisodeConfig::new(PolicyKind::Frontier, start)
        },
    )?;
    let tasks = sample_tasks(&plan, 8, 0);

    let descriptor = NavConfig::default();
    let true_goal = NavConfig {
        localization: GoalLocalization::GroundTruth,
        ..NavConfig::default()
    };
    let arms = [
        ("log, true goal", Some(&log), &true_goal),
        ("log, matched goal", Some(&log), &descriptor),
        ("no prior map", None, &descriptor),
    ];
    for (name, log, cfg) in arms {
        let records = downstream_navigation(&plan, mode, log, &tasks, cfg)?;
        let wins = records.iter().filter(|r| r.success).count();
        println!(
            "{name:<18} SPL {:.3} ({wins}/{} reached)",
            spl(&records)?,
            records.len()
        );
    }

    let errs = localization_errors(&plan, mode, &log, &tasks, 5, &SensorConfig::default())?;
    for (i, (a, b)) in errs.top1.iter().zip(&errs.topk).enumerate() {
        println!("goal {i}: top-1 error {a:5.2} m, top-5 error {b:5.2} m");
    }
    Ok(())
}
