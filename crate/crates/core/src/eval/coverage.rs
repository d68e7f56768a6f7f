//! Coverage experiments: a grid of episodes over worlds, start poses,
//! policies and seed replicates, reduced to per-step coverage curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::policies::PolicyKind;
use crate::rewards::RewardConfig;
use crate::seed::{derive_seed, rng_for};
use crate::sensor::SensorConfig;
use crate::world::{Floorplan, WorldMode};

use super::episode::{run_episode, EpisodeConfig, EpisodeTrace};
use super::{sample_pose, EvalError};

const START_STREAM: u64 = 10;
const EPISODE_STREAM: u64 = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSpec {
    pub policies: Vec<PolicyKind>,
    pub eta: f64,
    pub door_mismatch: bool,
    pub steps: usize,
    pub starts_per_world: usize,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub reward: RewardConfig,
}

impl Default for CoverageSpec {
    fn default() -> Self {
        Self {
            policies: vec![
                PolicyKind::Frontier,
                PolicyKind::Straight,
                PolicyKind::Random,
            ],
            eta: 0.0,
            door_mismatch: false,
            steps: 1000,
            starts_per_world: 5,
            replicates: 3,
            seed: 0,
            sensor: SensorConfig::default(),
            reward: RewardConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeJob {
    pub world: usize,
    pub start: usize,
    pub replicate: usize,
    pub config: EpisodeConfig,
}

/// Expands a spec into episodes. Start poses depend only on the master seed
/// and `(world, start)`, so every policy and replicate shares them.
pub fn plan_jobs(worlds: &[Floorplan], spec: &CoverageSpec) -> Vec<EpisodeJob> {
    let mode = WorldMode {
        door_mismatch: spec.door_mismatch,
    };
    let mut jobs = Vec::new();
    for &policy in &spec.policies {
        for (w, plan) in worlds.iter().enumerate() {
            for s in 0..spec.starts_per_world {
                let start = sample_pose(
                    plan,
                    &mut rng_for(spec.seed, &[START_STREAM, w as u64, s as u64]),
                );
                for r in 0..spec.replicates {
                    jobs.push(EpisodeJob {
                        world: w,
                        start: s,
                        replicate: r,
                        config: EpisodeConfig {
                            policy,
                            steps: spec.steps,
                            eta: spec.eta,
                            seed: derive_seed(
                                spec.seed,
                                &[EPISODE_STREAM, w as u64, s as u64, r as u64],
                            ),
                            mode,
                            start,
                            sensor: spec.sensor,
                            reward: spec.reward,
                        },
                    });
                }
            }
        }
    }
    jobs
}

/// Runs jobs in parallel on the current rayon pool; output order follows
/// `jobs`. Episodes that never draw randomness (a deterministic policy with
/// `eta == 0`) are run once per distinct configuration and copied, since
/// their traces cannot depend on the seed.
pub fn run_jobs(worlds: &[Floorplan], jobs: &[EpisodeJob]) -> Result<Vec<EpisodeTrace>, EvalError> {
    let seedless = |job: &EpisodeJob| !job.config.policy.uses_rng() && job.config.eta == 0.0;
    let canonical = |job: &EpisodeJob| {
        let mut cfg = job.config.clone();
        cfg.seed = 0;
        (
            job.world,
            serde_json::to_string(&cfg).expect("configs serialize"),
        )
    };
    let mut unique: Vec<usize> = Vec::new();
    let mut source = vec![0usize; jobs.len()];
    let mut seen: BTreeMap<(usize, String), usize> = BTreeMap::new();
    for (i, job) in jobs.iter().enumerate() {
        if seedless(job) {
            let key = canonical(job);
            if let Some(&u) = seen.get(&key) {
                source[i] = u;
                continue;
            }
            seen.insert(key, unique.len());
        }
        source[i] = unique.len();
        unique.push(i);
    }
    let ran: Vec<EpisodeTrace> = unique
        .par_iter()
        .map(|&i| run_episode(&worlds[jobs[i].world], &jobs[i].config))
        .collect::<Result<_, _>>()?;
    Ok(jobs
        .iter()
        .zip(&source)
        .map(|(job, &u)| {
            let mut trace = ran[u].clone();
            trace.header.seed = job.config.seed;
            trace
        })
        .collect())
}

/// True coverage statistics per time step for one (policy, eta, mode) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCurve {
    pub policy: PolicyKind,
    pub eta: f64,
    pub mode: String,
    pub runs: usize,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl CoverageCurve {
    /// Mean true coverage after the last step.
    pub fn end_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }
}

/// Reduces traces to curves. Traces are put in a canonical order first, so
/// the result does not depend on the order they are passed in.
pub fn aggregate(traces: &[EpisodeTrace]) -> Result<Vec<CoverageCurve>, EvalError> {
    let mut groups: BTreeMap<(PolicyKind, u64, String), Vec<&EpisodeTrace>> = BTreeMap::new();
    for t in traces {
        let h = &t.header;
        groups
            .entry((h.policy, h.eta.to_bits(), h.mode.clone()))
            .or_default()
            .push(t);
    }
    let mut curves = Vec::new();
    for ((policy, eta_bits, mode), mut members) in groups {
        members.sort_by(|a, b| {
            let (ha, hb) = (&a.header, &b.header);
            ha.world
                .cmp(&hb.world)
                .then(ha.start.x.total_cmp(&hb.start.x))
                .then(ha.start.y.total_cmp(&hb.start.y))
                .then(ha.start.theta.total_cmp(&hb.start.theta))
                .then(ha.seed.cmp(&hb.seed))
        });
        let len = members[0].steps.len();
        if members.iter().any(|m| m.steps.len() != len) {
            return Err(EvalError::Trace(format!(
                "traces for policy {policy} have different lengths"
            )));
        }
        let n = members.len() as f64;
        let mut mean = vec![0.0; len];
        let mut min = vec![f64::INFINITY; len];
        let mut max = vec![f64::NEG_INFINITY; len];
        for m in &members {
            for (t, row) in m.steps.iter().enumerate() {
                let c = row.true_coverage_m2;
                mean[t] += c;
                min[t] = min[t].min(c);
                max[t] = max[t].max(c);
            }
        }
        mean.iter_mut().for_each(|v| *v /= n);
        curves.push(CoverageCurve {
            policy,
            eta: f64::from_bits(eta_bits),
            mode,
            runs: members.len(),
            mean,
            min,
            max,
        });
    }
    Ok(curves)
}

/// CSV with columns `t,policy,eta,mode,mean,min,max`; `t` starts at 1.
pub fn curves_to_csv(curves: &[CoverageCurve]) -> String {
    let mut out = String::from("t,policy,eta,mode,mean,min,max\n");
    for c in curves {
        for t in 0..c.mean.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                t + 1,
                c.policy,
                c.eta,
                c.mode,
                c.mean[t],
                c.min[t],
                c.max[t]
            )
            .unwrap();
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub curves: Vec<CoverageCurve>,
    pub traces: Vec<EpisodeTrace>,
}

impl CoverageReport {
    pub fn curve(&self, policy: PolicyKind) -> Option<&CoverageCurve> {
        self.curves.iter().find(|c| c.policy == policy)
    }
}

pub fn coverage_experiment(
    worlds: &[Floorplan],
    spec: &CoverageSpec,
) -> Result<CoverageReport, EvalError> {
    if worlds.is_empty()
        || spec.policies.is_empty()
        || spec.starts_per_world == 0
        || spec.replicates == 0
    {
        return Err(EvalError::Config(
            "coverage experiment needs worlds, policies, starts and replicates".into(),
        ));
    }
    if spec.steps == 0 {
        return Err(EvalError::Config("steps must be positive".into()));
    }
    let jobs = plan_jobs(worlds, spec);
    let traces = run_jobs(worlds, &jobs)?;
    Ok(CoverageReport {
        curves: aggregate(&traces)?,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate_house, GenParams};

    fn small_spec() -> CoverageSpec {
        CoverageSpec {
            policies: vec![PolicyKind::Frontier, PolicyKind::Random],
            steps: 60,
            starts_per_world: 2,
            replicates: 2,
            seed: 9,
            ..CoverageSpec::default()
        }
    }

    #[test]
    fn curves_are_order_independent_and_bounded() {
        let worlds = vec![generate_house(1, &GenParams::with_target_area(60.0)).unwrap()];
        let report = coverage_experiment(&worlds, &small_spec()).unwrap();
        assert_eq!(report.traces.len(), 8);
        assert_eq!(report.curves.len(), 2);
        let mut reversed = report.traces.clone();
        reversed.reverse();
        assert_eq!(aggregate(&reversed).unwrap(), report.curves);
        for c in &report.curves {
            assert_eq!(c.runs, 4);
            for t in 0..c.mean.len() {
                assert!(c.min[t] <= c.mean[t] + 1e-12 && c.mean[t] <= c.max[t] + 1e-12);
            }
        }
        let csv = curves_to_csv(&report.curves);
        assert_eq!(csv.lines().count(), 1 + 2 * 60);
        assert!(csv.starts_with("t,policy,eta,mode,mean,min,max\n1,random,0,matched,"));
    }

    #[test]
    fn shared_traces_match_fresh_runs() {
        let worlds = vec![generate_house(2, &GenParams::with_target_area(60.0)).unwrap()];
        let spec = small_spec();
        let jobs = plan_jobs(&worlds, &spec);
        let traces = run_jobs(&worlds, &jobs).unwrap();
        for (job, trace) in jobs.iter().zip(&traces) {
            if job.config.policy == PolicyKind::Frontier && job.replicate == 1 {
                assert_eq!(&run_episode(&worlds[0], &job.config).unwrap(), trace);
            }
        }
    }
}
