//! Command-line runner: world generation, single episodes, coverage
//! experiments and downstream navigation.
//!
//! Every command resolves its settings into an [`ExperimentConfig`], writes
//! it as `config.json` next to its outputs, and accepts it back through
//! `--config` to reproduce the run. Failures print a JSON error record on
//! stderr and exit with status 1.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tempfile::NamedTempFile;
use thiserror::Error;

use crate::eval::{
    aggregate, collect_experience, curves_to_csv, downstream_navigation, localization_errors,
    plan_jobs, read_trace, run_jobs, sample_pose, sample_tasks, simulate, spl, success_curve,
    write_trace, CoverageSpec, EpisodeConfig, EpisodeTrace, EvalError, GoalLocalization, NavConfig,
    SplRecord,
};
use crate::kinematics::Pose;
use crate::mapping::coverage;
use crate::policies::{PolicyKind, UnknownPolicy};
use crate::seed::{derive_seed, rng_for};
use crate::world::{generate_house, traversable_area, Floorplan, GenParams, WorldError, WorldMode};

const GEN_STREAM: u64 = 30;
const START_STREAM: u64 = 31;
const DOWNSTREAM_STREAM: u64 = 32;
/// Steps between map snapshots written by `explore`.
pub const SNAPSHOT_EVERY: usize = 100;
/// Localization success thresholds in meters.
pub const THRESHOLDS: [f64; 6] = [0.5, 1.0, 2.0, 3.0, 5.0, 10.0];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Policy(#[from] UnknownPolicy),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("{path}: {source}")]
    Load { path: PathBuf, source: WorldError },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Policy(_) => "config",
            CliError::World(_) | CliError::Load { .. } => "world",
            CliError::Eval(_) => "eval",
            CliError::Io { .. } => "io",
            CliError::Json(_) => "json",
            CliError::Pool(_) => "threads",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "explore",
    version,
    about = "Deterministic 2D exploration simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate floorplans and a manifest.
    GenWorlds(GenWorldsArgs),
    /// Run one episode, writing a JSONL trace and map snapshots.
    Explore(ExploreArgs),
    /// Run a coverage experiment and write per-step curves as CSV.
    EvalCoverage(EvalCoverageArgs),
    /// Explore, then navigate to sampled goals with and without the log.
    EvalDownstream(EvalDownstreamArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    /// Single floorplan file.
    #[arg(long)]
    pub world: Option<PathBuf>,
    /// Directory of floorplan files (`*.txt`, sorted by name).
    #[arg(long)]
    pub worlds: Option<PathBuf>,
    /// Policy name, or a comma-separated list for eval-coverage.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub door_mismatch: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// A `config.json` written by an earlier run; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenWorldsArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Number of worlds.
    #[arg(long)]
    pub count: Option<usize>,
    /// Target traversable area in square meters.
    #[arg(long)]
    pub target_area: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Start pose as `x,y,theta` (meters, degrees); sampled from the seed
    /// when omitted.
    #[arg(long)]
    pub start: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalCoverageArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Start poses per world.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Rebuild the CSV from the traces in this directory instead of running.
    #[arg(long)]
    pub from_traces: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalDownstreamArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Navigation goals per world.
    #[arg(long)]
    pub goals: Option<usize>,
    /// Policy whose log serves as the localization baseline.
    #[arg(long)]
    pub baseline: Option<String>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    pub world: Option<PathBuf>,
    pub worlds: Option<PathBuf>,
    pub policies: Vec<PolicyKind>,
    pub baseline: PolicyKind,
    pub steps: usize,
    pub eta: f64,
    pub door_mismatch: bool,
    pub seed: u64,
    pub replicates: usize,
    pub starts: usize,
    pub goals: usize,
    pub count: usize,
    pub target_area: f64,
    pub start: Option<Pose>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            world: None,
            worlds: None,
            policies: vec![PolicyKind::Frontier],
            baseline: PolicyKind::Random,
            steps: 1000,
            eta: 0.0,
            door_mismatch: false,
            seed: 0,
            replicates: 1,
            starts: 1,
            goals: 20,
            count: 20,
            target_area: GenParams::default().target_area,
            start: None,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    fn defaults_for(command: &str) -> Self {
        let mut cfg = Self {
            command: command.to_string(),
            ..Self::default()
        };
        match command {
            "eval-coverage" => {
                cfg.policies = vec![
                    PolicyKind::Frontier,
                    PolicyKind::Straight,
                    PolicyKind::Random,
                ];
                cfg.starts = 5;
                cfg.replicates = 3;
            }
            "eval-downstream" => cfg.steps = 1500,
            _ => {}
        }
        cfg
    }

    fn mode(&self) -> WorldMode {
        WorldMode {
            door_mismatch: self.door_mismatch,
        }
    }
}

fn parse_policies(s: &str) -> Result<Vec<PolicyKind>, CliError> {
    let list = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<Vec<PolicyKind>, _>>()?;
    if list.is_empty() {
        return Err(CliError::Config("empty policy list".into()));
    }
    Ok(list)
}

fn parse_pose(s: &str) -> Result<Pose, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad start pose `{s}`: {e}")))?;
    match parts[..] {
        [x, y, theta] if parts.iter().all(|v| v.is_finite()) => Ok(Pose::new(x, y, theta)),
        _ => Err(CliError::Config(format!(
            "start pose must be `x,y,theta`, got `{s}`"
        ))),
    }
}

/// Layers defaults, the `--config` file and explicit flags, in that order.
fn resolve(command: &str, shared: &SharedArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &shared.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)?;
            if cfg.command != command {
                return Err(CliError::Config(format!(
                    "{} was written by `{}`, not `{command}`",
                    path.display(),
                    cfg.command
                )));
            }
            cfg
        }
        None => ExperimentConfig::defaults_for(command),
    };
    if let Some(w) = &shared.world {
        cfg.world = Some(w.clone());
        cfg.worlds = None;
    }
    if let Some(w) = &shared.worlds {
        cfg.worlds = Some(w.clone());
        cfg.world = None;
    }
    if let Some(p) = &shared.policy {
        cfg.policies = parse_policies(p)?;
    }
    if let Some(v) = shared.steps {
        cfg.steps = v;
    }
    if let Some(v) = shared.eta {
        cfg.eta = v;
    }
    cfg.door_mismatch |= shared.door_mismatch;
    if let Some(v) = shared.seed {
        cfg.seed = v;
    }
    if let Some(v) = shared.replicates {
        cfg.replicates = v;
    }
    if let Some(v) = &shared.out {
        cfg.out = v.clone();
    }
    if !(cfg.eta >= 0.0 && cfg.eta.is_finite()) {
        return Err(CliError::Config(format!(
            "eta must be finite and non-negative, got {}",
            cfg.eta
        )));
    }
    if cfg.steps == 0 {
        return Err(CliError::Config("steps must be positive".into()));
    }
    Ok(cfg)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn trace_bytes(trace: &EpisodeTrace) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf)?;
    Ok(buf)
}

/// Sorted `*.ext` files of a directory.
fn files_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(dir)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == ext))
        .collect();
    files.sort();
    Ok(files)
}

fn load_worlds(cfg: &ExperimentConfig) -> Result<Vec<Floorplan>, CliError> {
    let paths = match (&cfg.world, &cfg.worlds) {
        (Some(w), _) => vec![w.clone()],
        (None, Some(dir)) => files_with_extension(dir, "txt")?,
        (None, None) => {
            return Err(CliError::Config(
                "pass --world <file> or --worlds <dir>".into(),
            ))
        }
    };
    if paths.is_empty() {
        return Err(CliError::Config("no floorplan files found".into()));
    }
    paths
        .iter()
        .map(|p| {
            Floorplan::load(p).map_err(|source| CliError::Load {
                path: p.clone(),
                source,
            })
        })
        .collect()
}

fn single_policy(cfg: &ExperimentConfig) -> Result<PolicyKind, CliError> {
    match cfg.policies[..] {
        [p] => Ok(p),
        _ => Err(CliError::Config(format!(
            "`{}` takes exactly one policy",
            cfg.command
        ))),
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        Some(0) => Err(CliError::Config("jobs must be positive".into())),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f)),
        None => Ok(f()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    name: String,
    file: String,
    seed: u64,
    area_m2: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    seed: u64,
    target_area: f64,
    worlds: Vec<ManifestEntry>,
}

pub fn cmd_gen_worlds(args: &GenWorldsArgs) -> Result<(), CliError> {
    let mut cfg = resolve("gen-worlds", &args.shared)?;
    if let Some(n) = args.count {
        cfg.count = n;
    }
    if let Some(a) = args.target_area {
        cfg.target_area = a;
    }
    let params = GenParams::with_target_area(cfg.target_area);
    let mut entries = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let seed = derive_seed(cfg.seed, &[GEN_STREAM, i as u64]);
        let name = format!("world_{i:03}");
        let plan = generate_house(seed, &params)?.with_name(name.clone());
        let file = format!("{name}.txt");
        write_atomic(&cfg.out.join(&file), plan.to_text().as_bytes())?;
        entries.push(ManifestEntry {
            name,
            file,
            seed,
            area_m2: traversable_area(&plan),
        });
    }
    let manifest = Manifest {
        seed: cfg.seed,
        target_area: cfg.target_area,
        worlds: entries,
    };
    write_json(&cfg.out.join("manifest.json"), &manifest)?;
    write_json(&cfg.out.join("config.json"), &cfg)
}

pub fn cmd_explore(args: &ExploreArgs) -> Result<(), CliError> {
    let mut cfg = resolve("explore", &args.shared)?;
    if let Some(s) = &args.start {
        cfg.start = Some(parse_pose(s)?);
    }
    let worlds = load_worlds(&cfg)?;
    let [plan] = &worlds[..] else {
        return Err(CliError::Config("explore runs on exactly one world".into()));
    };
    let start = match cfg.start {
        Some(p) => p,
        None => sample_pose(plan, &mut rng_for(cfg.seed, &[START_STREAM])),
    };
    let episode = EpisodeConfig {
        steps: cfg.steps,
        eta: cfg.eta,
        seed: cfg.seed,
        mode: cfg.mode(),
        ..EpisodeConfig::new(single_policy(&cfg)?, start)
    };
    let mut snapshots = Vec::new();
    let outcome = simulate(plan, &episode, |t, map| {
        if t % SNAPSHOT_EVERY == 0 {
            snapshots.push((t, map.to_pgm(), coverage(map)));
        }
    })?;
    for (t, pgm, _) in &snapshots {
        write_atomic(&cfg.out.join(format!("map_{t:05}.pgm")), pgm.as_bytes())?;
    }
    write_atomic(&cfg.out.join("trace.jsonl"), &trace_bytes(&outcome.trace)?)?;
    write_json(&cfg.out.join("config.json"), &cfg)
}

fn trace_file_name(trace: &EpisodeTrace, start: usize, replicate: usize) -> String {
    let h = &trace.header;
    format!("{}_{}_s{start:02}_r{replicate:02}.jsonl", h.policy, h.world)
}

pub fn cmd_eval_coverage(args: &EvalCoverageArgs) -> Result<(), CliError> {
    let mut cfg = resolve("eval-coverage", &args.shared)?;
    if let Some(s) = args.starts {
        cfg.starts = s;
    }
    let traces = match &args.from_traces {
        Some(dir) => {
            let files = files_with_extension(dir, "jsonl")?;
            if files.is_empty() {
                return Err(CliError::Config(format!(
                    "no .jsonl traces in {}",
                    dir.display()
                )));
            }
            files
                .iter()
                .map(|p| {
                    let f = fs::File::open(p).map_err(io_err(p))?;
                    read_trace(BufReader::new(f)).map_err(CliError::from)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        None => {
            if cfg.starts == 0 || cfg.replicates == 0 {
                return Err(CliError::Config(
                    "starts and replicates must be positive".into(),
                ));
            }
            let worlds = load_worlds(&cfg)?;
            let spec = CoverageSpec {
                policies: cfg.policies.clone(),
                eta: cfg.eta,
                door_mismatch: cfg.door_mismatch,
                steps: cfg.steps,
                starts_per_world: cfg.starts,
                replicates: cfg.replicates,
                seed: cfg.seed,
                ..CoverageSpec::default()
            };
            let jobs = plan_jobs(&worlds, &spec);
            let traces = with_pool(args.shared.jobs, || run_jobs(&worlds, &jobs))??;
            let dir = cfg.out.join("traces");
            for (job, trace) in jobs.iter().zip(&traces) {
                let name = trace_file_name(trace, job.start, job.replicate);
                write_atomic(&dir.join(name), &trace_bytes(trace)?)?;
            }
            write_json(&cfg.out.join("config.json"), &cfg)?;
            traces
        }
    };
    let curves = aggregate(&traces)?;
    write_atomic(
        &cfg.out.join("curves.csv"),
        curves_to_csv(&curves).as_bytes(),
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct LocalizationSummary {
    policy: PolicyKind,
    thresholds: Vec<f64>,
    top1_success: Vec<f64>,
    top5_success: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DownstreamSummary {
    worlds: usize,
    goals: usize,
    spl_with_log: f64,
    spl_with_log_true_goal: f64,
    spl_no_map: f64,
    localization: Vec<LocalizationSummary>,
}

pub fn cmd_eval_downstream(args: &EvalDownstreamArgs) -> Result<(), CliError> {
    let mut cfg = resolve("eval-downstream", &args.shared)?;
    if let Some(g) = args.goals {
        cfg.goals = g;
    }
    if let Some(b) = &args.baseline {
        cfg.baseline = b.parse()?;
    }
    if cfg.goals == 0 {
        return Err(CliError::Config("goals must be positive".into()));
    }
    let explorer = single_policy(&cfg)?;
    let worlds = load_worlds(&cfg)?;
    let mode = cfg.mode();
    let nav = NavConfig::default();
    let true_goal = NavConfig {
        localization: GoalLocalization::GroundTruth,
        ..nav.clone()
    };
    let run = || -> Result<DownstreamSummary, CliError> {
        let (mut with_log, mut with_truth, mut no_map) = (Vec::new(), Vec::new(), Vec::new());
        let mut errors = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
        for (w, plan) in worlds.iter().enumerate() {
            let w = w as u64;
            let start = sample_pose(plan, &mut rng_for(cfg.seed, &[DOWNSTREAM_STREAM, w]));
            let episode = |policy| EpisodeConfig {
                steps: cfg.steps,
                eta: cfg.eta,
                seed: derive_seed(cfg.seed, &[DOWNSTREAM_STREAM, w, 1]),
                mode,
                ..EpisodeConfig::new(policy, start)
            };
            let tasks = sample_tasks(
                plan,
                cfg.goals,
                derive_seed(cfg.seed, &[DOWNSTREAM_STREAM, w, 2]),
            );
            for (i, policy) in [explorer, cfg.baseline].into_iter().enumerate() {
                let log = collect_experience(plan, &episode(policy))?;
                if i == 0 {
                    with_log.extend(downstream_navigation(plan, mode, Some(&log), &tasks, &nav)?);
                    with_truth.extend(downstream_navigation(
                        plan,
                        mode,
                        Some(&log),
                        &tasks,
                        &true_goal,
                    )?);
                }
                let e = localization_errors(plan, mode, &log, &tasks, 5, &nav.sensor)?;
                errors[i].0.extend(e.top1);
                errors[i].1.extend(e.topk);
            }
            no_map.extend(downstream_navigation(plan, mode, None, &tasks, &nav)?);
        }
        let score = |r: &[SplRecord]| spl(r).map_err(CliError::from);
        Ok(DownstreamSummary {
            worlds: worlds.len(),
            goals: cfg.goals,
            spl_with_log: score(&with_log)?,
            spl_with_log_true_goal: score(&with_truth)?,
            spl_no_map: score(&no_map)?,
            localization: [explorer, cfg.baseline]
                .into_iter()
                .zip(&errors)
                .map(|(policy, (top1, top5))| LocalizationSummary {
                    policy,
                    thresholds: THRESHOLDS.to_vec(),
                    top1_success: success_curve(top1, &THRESHOLDS),
                    top5_success: success_curve(top5, &THRESHOLDS),
                })
                .collect(),
        })
    };
    let summary = with_pool(args.shared.jobs, run)??;
    write_json(&cfg.out.join("summary.json"), &summary)?;
    write_json(&cfg.out.join("config.json"), &cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::GenWorlds(a) => cmd_gen_worlds(a),
        Command::Explore(a) => cmd_explore(a),
        Command::EvalCoverage(a) => cmd_eval_coverage(a),
        Command::EvalDownstream(a) => cmd_eval_downstream(a),
    }
}

/// Parses the process arguments and runs the command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
