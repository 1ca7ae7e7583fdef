mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "socnav",
    version,
    about = "Hybrid-policy robot navigation simulator",
    after_help = "Set SOCNAV_WORKERS to bound the number of parallel episode workers."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the actor-critic on a static scenario.
    Train(TrainArgs),
    /// Evaluate a policy on a scenario and write a results CSV.
    Eval(EvalArgs),
    /// Sweep noise, agent count or agent speed across planner modes.
    Sweep(SweepArgs),
    /// Write per-step trajectories of one episode for each mode.
    Trace(TraceArgs),
}

/// Scenario selection and per-run overrides shared by every command.
#[derive(Args, Debug, Clone)]
pub struct ScenarioArgs {
    /// Scenario TOML file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Built-in map to use when no scenario file is given.
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long)]
    pub agents: Option<usize>,
    /// Agent maximum speed (m/s).
    #[arg(long)]
    pub agent_speed: Option<f64>,
    /// `sfm` or `cvm`.
    #[arg(long)]
    pub behavior: Option<String>,
    /// `ed` or `pd`.
    #[arg(long)]
    pub sampling: Option<String>,
    /// Lidar noise σ (m).
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Environment steps (overrides `training.steps`).
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Planner mode (overrides `planner.mode`).
    #[arg(long)]
    pub mode: Option<String>,
    /// Checkpoint path or `scripted`.
    #[arg(long, default_value = "scripted")]
    pub policy: String,
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    /// Write one trajectory CSV per episode.
    #[arg(long)]
    pub emit_traces: bool,
    /// Write the anticipative circles alongside traces.
    #[arg(long)]
    pub emit_circles: bool,
    /// Write the planner's Lidar scans alongside traces.
    #[arg(long)]
    pub emit_scans: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// `noise`, `agents` or `velocity`.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated axis values.
    #[arg(long, allow_hyphen_values = true)]
    pub values: String,
    /// Comma-separated planner modes.
    #[arg(long, default_value = "hybrid,arp,app,app_at")]
    pub modes: String,
    #[arg(long, default_value = "scripted")]
    pub policy: String,
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    /// Skip the SVG plot.
    #[arg(long)]
    pub no_plot: bool,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated planner modes, all run on the same episode.
    #[arg(long, alias = "mode", default_value = "hybrid")]
    pub modes: String,
    #[arg(long, default_value = "scripted")]
    pub policy: String,
    /// Episode seed (defaults to the scenario seed).
    #[arg(long)]
    pub episode_seed: Option<u64>,
    #[arg(long)]
    pub emit_circles: bool,
    #[arg(long)]
    pub emit_scans: bool,
    /// Also draw the trajectories as SVG.
    #[arg(long)]
    pub svg: bool,
}

/// One-line `error: kind=<kind> msg=<text>` report.
fn report(kind: &str, msg: &str) {
    let flat = msg.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error: kind={kind} msg={flat}");
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    use socnav::Error as E;
    match err.downcast_ref::<socnav::Error>() {
        Some(E::Config(_)) => "config",
        Some(E::Precondition(_)) => "precondition",
        Some(E::Checkpoint(_)) => "checkpoint",
        Some(E::Diverged { .. }) => "diverged",
        Some(E::Io(_)) => "io",
        Some(E::MalformedPolygon { .. } | E::ObstacleOutOfBounds { .. } | E::InvalidMap(_)) => "map",
        Some(_) => "runtime",
        None if err.downcast_ref::<commands::UsageError>().is_some() => "usage",
        None if err.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "runtime",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            report("usage", first);
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Trace(a) => commands::trace(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = error_kind(&e);
            report(kind, &format!("{e:#}"));
            ExitCode::from(if kind == "usage" { 2 } else { 1 })
        }
    }
}
