//! CSV and SVG writers. Everything here is a pure function of its inputs so
//! repeated runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use socnav::episodes::{EpisodeResult, EpisodeTrace, Metrics, SweepAxis, SweepRow};
use socnav::hybrid::PlannerMode;
use socnav::policy::TrainLogRow;
use socnav::WorldMap;

#[derive(Debug, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub mode: String,
    pub axis: String,
    pub value: f64,
    pub policy: String,
    pub episodes: usize,
    pub sr: f64,
    pub cr: f64,
    pub tr: f64,
    pub mean_steps: f64,
    pub mean_min_clearance: f64,
}

impl ResultRow {
    pub fn new(scenario: &str, mode: PlannerMode, axis: &str, value: f64, policy: &str, m: &Metrics) -> Self {
        Self {
            scenario: scenario.into(),
            mode: mode.to_string(),
            axis: axis.into(),
            value,
            policy: policy.into(),
            episodes: m.episodes,
            sr: m.sr(),
            cr: m.cr(),
            tr: m.tr(),
            mean_steps: m.mean_steps,
            mean_min_clearance: m.mean_min_clearance,
        }
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("opening {}", path.display()))
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_episodes(path: &Path, results: &[EpisodeResult]) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        episode: usize,
        seed: u64,
        outcome: &'a str,
        steps: usize,
        min_clearance: f64,
        path_length: f64,
    }
    let mut w = writer(path)?;
    for (i, r) in results.iter().enumerate() {
        w.serialize(Row {
            episode: i,
            seed: r.seed,
            outcome: outcome_str(r.outcome),
            steps: r.steps_taken,
            min_clearance: r.min_clearance,
            path_length: r.path_length,
        })?;
    }
    w.flush()?;
    Ok(())
}

fn outcome_str(o: socnav::episodes::Outcome) -> &'static str {
    use socnav::episodes::Outcome::*;
    match o {
        Success => "success",
        Collision => "collision",
        Timeout => "timeout",
    }
}

pub fn write_train_log(path: &Path, log: &[TrainLogRow]) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        step: usize,
        episode: usize,
        episode_return: f64,
        episode_steps: usize,
        outcome: &'a str,
        critic_loss: f64,
        actor_loss: f64,
    }
    let mut w = writer(path)?;
    for r in log {
        w.serialize(Row {
            step: r.step,
            episode: r.episode,
            episode_return: r.episode_return,
            episode_steps: r.episode_steps,
            outcome: outcome_str(r.outcome),
            critic_loss: r.critic_loss,
            actor_loss: r.actor_loss,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: one `robot` row per step (pose and command), one `agent`
/// row per agent per step, a `goal` row first and a final state after the
/// last command.
pub fn write_trace(path: &Path, trace: &EpisodeTrace) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        step: usize,
        entity: &'static str,
        id: usize,
        x: f64,
        y: f64,
        heading: Option<f64>,
        vx: Option<f64>,
        vy: Option<f64>,
        linear: Option<f64>,
        angular: Option<f64>,
    }
    let point = |step, entity, id, x, y| Row {
        step,
        entity,
        id,
        x,
        y,
        heading: None,
        vx: None,
        vy: None,
        linear: None,
        angular: None,
    };
    let mut w = writer(path)?;
    w.serialize(point(0, "goal", 0, trace.goal.x, trace.goal.y))?;
    let agent_rows = |w: &mut csv::Writer<_>, step: usize, agents: &[(socnav::Vec2, socnav::Vec2)]| -> Result<()> {
        for (id, (p, v)) in agents.iter().enumerate() {
            w.serialize(Row {
                vx: Some(v.x),
                vy: Some(v.y),
                ..point(step, "agent", id, p.x, p.y)
            })?;
        }
        Ok(())
    };
    for s in &trace.steps {
        w.serialize(Row {
            heading: Some(s.pose.heading),
            linear: Some(s.action.linear),
            angular: Some(s.action.angular),
            ..point(s.step, "robot", 0, s.pose.position.x, s.pose.position.y)
        })?;
        agent_rows(&mut w, s.step, &s.agents)?;
    }
    let last = trace.steps.len();
    let p = &trace.final_pose;
    w.serialize(Row {
        heading: Some(p.heading),
        ..point(last, "robot", 0, p.position.x, p.position.y)
    })?;
    agent_rows(&mut w, last, &trace.final_agents)?;
    w.flush()?;
    Ok(())
}

pub fn write_circles(path: &Path, trace: &EpisodeTrace) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "agent", "k", "x", "y", "radius"])?;
    for s in &trace.steps {
        for c in &s.circles {
            w.serialize((s.step, c.agent_id, c.step_index, c.center.x, c.center.y, c.radius))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_scans(path: &Path, trace: &EpisodeTrace) -> Result<()> {
    let mut w = writer(path)?;
    let n = trace.steps.first().map_or(socnav::sensing::NUM_BEAMS, |s| s.scan.ranges.len());
    let mut header = vec!["step".to_string()];
    header.extend((0..n).map(|i| format!("r{i}")));
    w.write_record(&header)?;
    for s in &trace.steps {
        let mut rec = vec![s.step.to_string()];
        rec.extend(s.scan.ranges.iter().map(|r| r.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Success rate against the axis value, one polyline per mode.
pub fn sweep_svg(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (x0, x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |v: f64| m + (v - x0) / span * (w - 2.0 * m);
    let py = |sr: f64| h - m - sr / 100.0 * (h - 2.0 * m);

    let mut modes: Vec<PlannerMode> = Vec::new();
    for r in rows {
        if !modes.contains(&r.mode) {
            modes.push(r.mode);
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
        h - m,
        w - m
    );
    for sr in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{sr}</text>"#, m - 6.0, py(sr) + 4.0);
    }
    let mut seen = Vec::new();
    for &v in &xs {
        if !seen.contains(&v) {
            seen.push(v);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{v}</text>"#, px(v), h - m + 16.0);
        }
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{axis}</text>"#, w / 2.0, h - 10.0);
    let _ = writeln!(s, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">SR (%)</text>"#, h / 2.0, h / 2.0);
    for (i, mode) in modes.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = rows
            .iter()
            .filter(|r| r.mode == *mode)
            .map(|r| format!("{:.1},{:.1}", px(r.value), py(r.metrics.sr())))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{color}">{mode}</text>"#, w - m - 60.0, m + 14.0 * i as f64);
    }
    s.push_str("</svg>\n");
    s
}

/// Map obstacles with the robot path of each mode overlaid.
pub fn trace_svg(map: &WorldMap, runs: &[(PlannerMode, EpisodeResult)]) -> String {
    let scale = 600.0 / map.width.max(map.height);
    let (w, h) = (map.width * scale, map.height * scale);
    let p = |x: f64, y: f64| format!("{:.1},{:.1}", x * scale, h - y * scale);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w:.0}" height="{h:.0}" fill="white" stroke="black"/>"#);
    for poly in map.obstacles() {
        let pts: Vec<String> = poly.vertices().iter().map(|v| p(v.x, v.y)).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="#bbb"/>"##, pts.join(" "));
    }
    for (i, (mode, r)) in runs.iter().enumerate() {
        let Some(t) = &r.trace else { continue };
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<String> = t.steps.iter().map(|st| p(st.pose.position.x, st.pose.position.y)).collect();
        pts.push(p(t.final_pose.position.x, t.final_pose.position.y));
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        let _ = writeln!(s, r#"<text x="8" y="{}" fill="{color}">{mode}</text>"#, 16 + 14 * i);
        if i == 0 {
            let g = p(t.goal.x, t.goal.y);
            let (gx, gy) = g.split_once(',').expect("pair");
            let _ = writeln!(s, r#"<circle cx="{gx}" cy="{gy}" r="{:.1}" fill="none" stroke="green"/>"#, 0.4 * scale);
        }
    }
    s.push_str("</svg>\n");
    s
}
