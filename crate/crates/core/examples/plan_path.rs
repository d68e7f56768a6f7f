//! Plans between two poses on a partially explored map.

use explore_core::eval::{sample_pose, simulate, EpisodeConfig};
use explore_core::geom::Cell;
use explore_core::planner::{plan_path, PlanQuery};
use explore_core::policies::PolicyKind;
use explore_core::seed::rng_for;
use explore_core::world::{generate_house, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = generate_house(21, &GenParams::default())?;
    let mut rng = rng_for(21, &[0]);
    let (a, b) = (sample_pose(&plan, &mut rng), sample_pose(&plan, &mut rng));
    let res = plan.resolution();

    let explore = |steps| {
        let cfg = EpisodeConfig {
            steps,
            ..EpisodeConfig::new(PolicyKind::Frontier, a)
        };
        simulate(&plan, &cfg, |_, _| {}).map(|o| o.agent_map)
    };
    println!(
        "straight-line distance {:.2} m",
        a.position().distance(b.position())
    );
    for steps in [100, 1500] {
        let mut map = explore(steps)?;
        // the search stays inside the map's extent, so grow it to the house
        map.ensure_contains(
            Cell::new(0, 0),
            Cell::new(plan.width() as i64 - 1, plan.height() as i64 - 1),
        );
        for unknown_is_free in [false, true] {
            let q = PlanQuery::new(a.position(), b.position()).unknown_is_free(unknown_is_free);
            match plan_path(&map, &q) {
                Ok(p) => println!(
                    "{steps:>4} steps explored, unknown free {unknown_is_free:<5}: {} cells, {:.2} m",
                    p.cells.len(),
                    p.length_m(res)
                ),
                Err(e) => println!("{steps:>4} steps explored, unknown free {unknown_is_free:<5}: {e}"),
            }
        }
    }
    Ok(())
}
