use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use socnav::config::ScenarioConfig;
use socnav::episodes::{run_batch, run_episode, sweep as run_sweep, AgentBehavior, EpisodeConfig, Metrics, SweepAxis};
use socnav::hybrid::PlannerMode;
use socnav::policy::checkpoint::{load_actor, save_params};
use socnav::policy::{initial_params, train as run_train, ActorPolicy, Policy, ScriptedPolicy};

use crate::output;
use crate::{EvalArgs, ScenarioArgs, SweepArgs, TraceArgs, TrainArgs};

/// Bad flag values that clap cannot check on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::error::Error for UsageError {}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Scenario file (or built-in map) with command-line overrides applied.
fn load_scenario(args: &ScenarioArgs, default_map: &str) -> Result<ScenarioConfig> {
    let mut s = match (&args.scenario, &args.map) {
        (Some(_), Some(_)) => return Err(usage("--scenario and --map are mutually exclusive")),
        (Some(path), None) => ScenarioConfig::load(path)?,
        (None, Some(map)) => ScenarioConfig::builtin(map),
        (None, None) => ScenarioConfig::builtin(default_map),
    };
    if let Some(n) = args.agents {
        s.agents.count = n;
    }
    if let Some(v) = args.agent_speed {
        s.agents.max_speed = v;
    }
    if let Some(b) = &args.behavior {
        s.agents.behavior = match b.as_str() {
            "sfm" => AgentBehavior::Sfm,
            "cvm" => AgentBehavior::Cvm,
            other => return Err(usage(format!("unknown agent behavior `{other}` (expected sfm or cvm)"))),
        };
    }
    if let Some(m) = &args.sampling {
        s.sampling.mode = m.parse().map_err(|e: socnav::Error| usage(e.to_string()))?;
    }
    if let Some(sigma) = args.noise {
        s.noise.sigma = sigma;
    }
    if let Some(n) = args.max_steps {
        s.episode.max_steps = n;
    }
    if let Some(seed) = args.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn parse_mode(s: &str) -> Result<PlannerMode> {
    s.trim().parse().map_err(|e: socnav::Error| usage(e.to_string()))
}

fn parse_modes(s: &str) -> Result<Vec<PlannerMode>> {
    let modes: Vec<PlannerMode> = s.split(',').filter(|m| !m.trim().is_empty()).map(parse_mode).collect::<Result<_>>()?;
    if modes.is_empty() {
        return Err(usage("at least one planner mode is required"));
    }
    Ok(modes)
}

fn load_policy(spec: &str) -> Result<Box<dyn Policy>> {
    if spec == "scripted" {
        return Ok(Box::new(ScriptedPolicy));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(socnav::Error::Checkpoint(format!("missing checkpoint {spec}")).into());
    }
    Ok(Box::new(ActorPolicy {
        actor: load_actor(path)?,
    }))
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Timestamps and invocation details, kept apart from the reproducible outputs.
fn write_metadata(dir: &Path, command: &str, scenario: &ScenarioConfig, extra: serde_json::Value) -> Result<()> {
    #[derive(Serialize)]
    struct Metadata<'a> {
        command: &'a str,
        args: Vec<String>,
        version: &'a str,
        finished_unix_s: u64,
        scenario: &'a ScenarioConfig,
        extra: serde_json::Value,
    }
    let meta = Metadata {
        command,
        args: std::env::args().skip(1).collect(),
        version: env!("CARGO_PKG_VERSION"),
        finished_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        scenario,
        extra,
    };
    fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let scenario = load_scenario(&args.scenario, "training")?;
    let env = scenario.episode_config()?;
    let mut cfg = scenario.training.clone();
    if let Some(steps) = args.steps {
        cfg.steps = steps;
    }
    let out = &args.scenario.out;
    prepare_out(out)?;
    let ck_dir = out.join("checkpoints");
    prepare_out(&ck_dir)?;
    let report = run_train(&env, &cfg, initial_params(scenario.seed), scenario.seed, Some(ck_dir))?;
    let ck_path = out.join("checkpoint.json");
    let digest = save_params(&report.params, cfg.steps as u64, &ck_path)?;
    output::write_train_log(&out.join("train_log.csv"), &report.log)?;

    let tail = &report.log[report.log.len().saturating_sub(20)..];
    let mean_return = if tail.is_empty() {
        0.0
    } else {
        tail.iter().map(|r| r.episode_return).sum::<f64>() / tail.len() as f64
    };
    println!(
        "trained {} steps, {} episodes, mean return (last {}) {:.2}",
        cfg.steps,
        report.log.len(),
        tail.len(),
        mean_return
    );
    println!("checkpoint {} sha256 {digest}", ck_path.display());
    write_metadata(out, "train", &scenario, serde_json::json!({ "steps": cfg.steps, "digest": digest }))
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    if args.episodes == 0 {
        return Err(usage("--episodes must be ≥ 1"));
    }
    let mut scenario = load_scenario(&args.scenario, "empty")?;
    if let Some(m) = &args.mode {
        scenario.planner.mode = parse_mode(m)?;
    }
    let policy = load_policy(&args.policy)?;
    let mut cfg: EpisodeConfig = scenario.episode_config()?;
    cfg.record_trace = args.emit_traces;
    let out = &args.scenario.out;
    prepare_out(out)?;

    let results = run_batch(&cfg, policy.as_ref(), args.episodes, scenario.seed)?;
    let metrics = Metrics::from_results(&results);
    let row = output::ResultRow::new(&cfg.map.name, cfg.mode, "none", 0.0, policy.name(), &metrics);
    output::write_results(&out.join("results.csv"), &[row])?;
    output::write_episodes(&out.join("episodes.csv"), &results)?;
    if args.emit_traces {
        let dir = out.join("traces");
        prepare_out(&dir)?;
        for (i, r) in results.iter().enumerate() {
            let trace = r.trace.as_ref().expect("traces were recorded");
            output::write_trace(&dir.join(format!("episode_{i:04}.csv")), trace)?;
            if args.emit_circles {
                output::write_circles(&dir.join(format!("episode_{i:04}_circles.csv")), trace)?;
            }
            if args.emit_scans {
                output::write_scans(&dir.join(format!("episode_{i:04}_scans.csv")), trace)?;
            }
        }
    }
    println!("{} {} {}: {metrics}", cfg.map.name, cfg.mode, policy.name());
    write_metadata(out, "eval", &scenario, serde_json::json!({ "episodes": args.episodes, "policy": args.policy }))
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let axis: SweepAxis = args.axis.parse().map_err(|e: socnav::Error| usage(e.to_string()))?;
    let values: Vec<f64> = args
        .values
        .split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.trim().parse::<f64>().map_err(|_| usage(format!("bad sweep value `{v}`"))))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(usage("--values must list at least one value"));
    }
    let modes = parse_modes(&args.modes)?;
    let default_map = if axis == SweepAxis::Velocity { "empty" } else { "building_1" };
    let scenario = load_scenario(&args.scenario, default_map)?;
    let policy = load_policy(&args.policy)?;
    let cfg = scenario.episode_config()?;
    let out = &args.scenario.out;
    prepare_out(out)?;

    let rows = run_sweep(axis, &values, &modes, &cfg, policy.as_ref(), args.episodes, scenario.seed)?;
    let records: Vec<output::ResultRow> = rows
        .iter()
        .map(|r| output::ResultRow::new(&cfg.map.name, r.mode, &axis.to_string(), r.value, policy.name(), &r.metrics))
        .collect();
    output::write_results(&out.join("sweep.csv"), &records)?;
    if !args.no_plot {
        fs::write(out.join("sweep.svg"), output::sweep_svg(axis, &rows))?;
    }
    for r in &rows {
        println!("{axis}={} {}: {}", r.value, r.mode, r.metrics);
    }
    write_metadata(out, "sweep", &scenario, serde_json::json!({ "axis": axis.to_string(), "values": values }))
}

pub fn trace(args: &TraceArgs) -> Result<()> {
    let modes = parse_modes(&args.modes)?;
    let scenario = load_scenario(&args.scenario, "empty")?;
    let policy = load_policy(&args.policy)?;
    let out = &args.scenario.out;
    prepare_out(out)?;
    let mut traces = Vec::new();
    for mode in modes {
        let mut cfg = scenario.episode_config()?;
        cfg.mode = mode;
        cfg.record_trace = true;
        if let Some(seed) = args.episode_seed {
            cfg.seed = seed;
        }
        let result = run_episode(&cfg, policy.as_ref())?;
        let trace = result.trace.as_ref().expect("trace was recorded");
        output::write_trace(&out.join(format!("trace_{mode}.csv")), trace)?;
        if args.emit_circles {
            output::write_circles(&out.join(format!("circles_{mode}.csv")), trace)?;
        }
        if args.emit_scans {
            output::write_scans(&out.join(format!("scans_{mode}.csv")), trace)?;
        }
        println!("{mode}: {:?} after {} steps", result.outcome, result.steps_taken);
        traces.push((mode, result));
    }
    if args.svg {
        let cfg = scenario.episode_config()?;
        fs::write(out.join("trace.svg"), output::trace_svg(&cfg.map, &traces))?;
    }
    write_metadata(out, "trace", &scenario, serde_json::json!({ "episode_seed": args.episode_seed }))
}
