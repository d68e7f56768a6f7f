//! A small coverage experiment over generated worlds, printed as CSV.

use explore_core::eval::{coverage_experiment, curves_to_csv, CoverageSpec};
use explore_core::world::{generate_house, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let worlds = (0..3)
        .map(|s| generate_house(100 + s, &GenParams::with_target_area(120.0)))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = CoverageSpec {
        steps: 200,
        starts_per_world: 2,
        replicates: 2,
        eta: 0.02,
        ..CoverageSpec::default()
    };
    let report = coverage_experiment(&worlds, &spec)?;
    for curve in &report.curves {
        println!(
            "{:<10} {} runs, mean end coverage {:.2} m2",
            curve.policy.name(),
            curve.runs,
            curve.end_mean()
        );
    }
    let csv = curves_to_csv(&report.curves);
    for line in csv.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
