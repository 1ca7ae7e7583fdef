use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use socnav::policy::checkpoint::{load_params, Checkpoint};
use socnav::policy::initial_params;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_socnav"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

fn out_dir(tmp: &tempfile::TempDir, name: &str) -> PathBuf {
    tmp.path().join(name)
}

fn single_error_line(out: &Output, kind: &str) {
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(&format!("error: kind={kind} msg=")), "{err}");
}

#[test]
fn eval_writes_one_row_summing_to_100() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "e");
    let stdout = ok(&[
        "eval", "--mode", "hybrid", "--policy", "scripted", "--episodes", "100", "--seed", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains(" - "), "{stdout}");
    let rows = csv_rows(&out.join("results.csv"));
    assert_eq!(rows.len(), 1);
    let sum: f64 = (6..9).map(|i| rows[0][i].parse::<f64>().unwrap()).sum();
    assert_eq!(sum, 100.0);
    assert_eq!(csv_rows(&out.join("episodes.csv")).len(), 100);
    assert!(out.join("metadata.json").exists());
}

#[test]
fn eval_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (out_dir(&tmp, "a"), out_dir(&tmp, "b"));
    for d in [&a, &b] {
        ok(&[
            "eval", "--scenario", &scenario("building_agents20.toml"), "--episodes", "10", "--out",
            d.to_str().unwrap(),
        ]);
    }
    for f in ["results.csv", "episodes.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_mode_is_a_usage_error() {
    let out = run(&["eval", "--mode", "warp", "--out", "/tmp/never-written"]);
    single_error_line(&out, "usage");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_flag_is_a_usage_error() {
    single_error_line(&run(&["eval", "--episodes", "many"]), "usage");
}

#[test]
fn missing_checkpoint_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "eval", "--policy", "/nonexistent/ck.json", "--out", out_dir(&tmp, "x").to_str().unwrap(),
    ]);
    single_error_line(&out, "checkpoint");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_zero_steps_saves_initialization() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "t");
    ok(&["train", "--steps", "0", "--seed", "4", "--out", out.to_str().unwrap()]);
    let params = load_params(&out.join("checkpoint.json")).unwrap();
    assert_eq!(params, initial_params(4));
    assert!(out.join("train_log.csv").exists());
}

#[test]
fn train_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let digests: Vec<String> = ["a", "b"]
        .iter()
        .map(|n| {
            let out = out_dir(&tmp, n);
            ok(&["train", "--steps", "300", "--seed", "7", "--out", out.to_str().unwrap()]);
            Checkpoint::load(&out.join("checkpoint.json")).unwrap().digest
        })
        .collect();
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn train_with_agents_is_a_precondition_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["train", "--agents", "3", "--steps", "10", "--out", out_dir(&tmp, "t").to_str().unwrap()]);
    single_error_line(&out, "precondition");
}

#[test]
fn trained_checkpoint_can_be_evaluated() {
    let tmp = tempfile::tempdir().unwrap();
    let t = out_dir(&tmp, "t");
    ok(&["train", "--steps", "0", "--out", t.to_str().unwrap()]);
    let ck = t.join("checkpoint.json");
    let e = out_dir(&tmp, "e");
    ok(&["eval", "--policy", ck.to_str().unwrap(), "--episodes", "3", "--out", e.to_str().unwrap()]);
    assert_eq!(&csv_rows(&e.join("results.csv"))[0][4], "actor");
}

#[test]
fn sweep_noise_has_one_row_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "s");
    ok(&[
        "sweep", "--axis", "noise", "--values", "0.1,0.2,0.4,0.8", "--modes", "hybrid", "--episodes", "5", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(csv_rows(&out.join("sweep.csv")).len(), 4);
}

#[test]
fn sweep_velocity_writes_csv_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "v");
    ok(&[
        "sweep", "--axis", "velocity", "--values", "1.2,2,3,4,5", "--modes", "hybrid,arp,app", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(csv_rows(&out.join("sweep.csv")).len(), 15);
    let svg = fs::read_to_string(out.join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() == 3);
}

#[test]
fn sweep_with_empty_values_fails() {
    single_error_line(&run(&["sweep", "--axis", "velocity", "--values", ""]), "usage");
    single_error_line(&run(&["sweep", "--axis", "sideways", "--values", "1"]), "usage");
}

#[test]
fn trace_modes_share_agents_until_actions_diverge() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "tr");
    ok(&[
        "trace", "--map", "empty", "--agents", "10", "--modes", "hybrid,app", "--episode-seed", "5", "--emit-circles",
        "--svg", "--out", out.to_str().unwrap(),
    ]);
    let a = csv_rows(&out.join("trace_hybrid.csv"));
    let b = csv_rows(&out.join("trace_app.csv"));
    // first robot row whose command differs
    let robot = |rows: &[csv::StringRecord]| -> Vec<(String, String, String)> {
        rows.iter()
            .filter(|r| &r[1] == "robot")
            .map(|r| (r[0].to_string(), r[8].to_string(), r[9].to_string()))
            .collect()
    };
    let (ra, rb) = (robot(&a), robot(&b));
    let diverge: usize = ra
        .iter()
        .zip(&rb)
        .position(|(x, y)| x != y)
        .map_or(usize::MAX, |i| ra[i].0.parse().unwrap());
    let agents = |rows: &[csv::StringRecord], upto: usize| -> Vec<Vec<String>> {
        rows.iter()
            .filter(|r| &r[1] == "agent" && r[0].parse::<usize>().unwrap() <= upto)
            .map(|r| r.iter().map(String::from).collect())
            .collect()
    };
    assert_eq!(agents(&a, diverge), agents(&b, diverge));
    assert!(!csv_rows(&out.join("circles_app.csv")).is_empty());
    assert!(csv_rows(&out.join("circles_hybrid.csv")).is_empty());
    assert!(out.join("trace.svg").exists());
}

#[test]
fn eval_emits_traces_circles_and_scans() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "et");
    ok(&[
        "eval", "--agents", "5", "--mode", "app", "--episodes", "2", "--emit-traces", "--emit-circles", "--emit-scans",
        "--out", out.to_str().unwrap(),
    ]);
    let dir = out.join("traces");
    for f in ["episode_0000.csv", "episode_0001_circles.csv", "episode_0000_scans.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let scans = csv_rows(&dir.join("episode_0000_scans.csv"));
    assert_eq!(scans[0].len(), 65);
}

#[test]
fn shipped_scenarios_load() {
    let tmp = tempfile::tempdir().unwrap();
    for s in ["static_pd.toml", "building_agents20.toml", "empty_crowd50.toml", "custom_corridor.toml"] {
        let out = out_dir(&tmp, s);
        ok(&["eval", "--scenario", &scenario(s), "--episodes", "2", "--out", out.to_str().unwrap()]);
    }
}

#[test]
fn malformed_scenario_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    fs::write(&path, "[map]\nbuiltin = \"empty\"\n[agents]\nwings = 2\n").unwrap();
    single_error_line(&run(&["eval", "--scenario", path.to_str().unwrap()]), "config");
}
