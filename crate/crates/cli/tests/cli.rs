use std::path::Path;
use std::process::{Command, Output};

use uavcov::io::{read_trajectory_csv, states_by_step};
use uavcov::partition::SwarmState;
use uavcov::scenario::bundled;
use uavcov::sim::criterion;

fn uavcov(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavcov"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

const TWIN: &str = r#"
name = "twin"
[sensor]
half_angle_deg = 20.0
z_min = 0.3
z_max = 2.3
quality = "uniform"
[region]
vertices = [[-2.0, -2.0], [2.0, -2.0], [2.0, 2.0], [-2.0, 2.0]]
[[nodes]]
id = 0
x = 0.0
y = 0.0
z = 0.8
[[nodes]]
id = 1
x = 0.0
y = 0.0
z = 0.8
[sim]
steps = 10
"#;

#[test]
fn run_writes_csv_json_and_requested_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavcov(&["run", "case_study_1", "--snapshots", "first,last", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("o");
    let mut svgs: Vec<String> = std::fs::read_dir(&o)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".svg"))
        .collect();
    svgs.sort();
    assert_eq!(svgs.len(), 2, "{svgs:?}");
    assert!(svgs.contains(&"snapshot_step_0.svg".to_string()));
    for name in &svgs {
        let svg = std::fs::read_to_string(o.join(name)).unwrap();
        assert_eq!(svg.matches(r#"class="sensing-circle""#).count(), 3);
        assert!(svg.contains(r#"class="piece own-circle""#));
    }

    // the final CSV state reproduces the logged criterion
    let sc = bundled("case_study_1").unwrap();
    let rows = read_trajectory_csv(&o.join("trajectory.csv")).unwrap();
    let (_, last) = states_by_step(&rows).into_iter().next_back().unwrap();
    let s = SwarmState::new(last, sc.state.model, sc.state.omega.clone()).unwrap();
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o.join("metrics.json")).unwrap()).unwrap();
    let logged = metrics["timeline"].as_array().unwrap().last().unwrap()["H"].as_f64().unwrap();
    assert!((criterion(&s) - logged).abs() < 1e-9);
    assert_eq!(metrics["converged"], serde_json::Value::Bool(true));
}

#[test]
fn numbered_snapshot_is_rendered_at_that_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavcov(&["run", "case_study_1", "--snapshots", "250", "--out", "o"], dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("o/snapshot_step_250.svg").exists());
}

#[test]
fn altitude_above_band_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), TWIN.replacen("z = 0.8", "z = 2.5", 1)).unwrap();
    let out = uavcov(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodes[0].z"));
}

#[test]
fn malformed_snapshot_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavcov(&["run", "case_study_1", "--snapshots", "middle"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gradient_check_passes_on_a_regular_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavcov(&["run", "case_study_2", "--check-gradient", "--seed", "5", "--out", "o"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let line = stdout.lines().find(|l| l.starts_with("gradient check")).unwrap();
    let err: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(err <= 1e-3);
}

#[test]
fn gradient_check_fails_on_coincident_twins() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("twin.toml"), TWIN).unwrap();
    let out = uavcov(&["run", "twin.toml", "--check-gradient"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn optimal_altitude_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavcov(&["optimal-altitude", "case_study_2"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let z: f64 = stdout.lines().next().unwrap().trim_start_matches("z_opt = ").parse().unwrap();
    assert!((z - 1.35902).abs() < 1e-4);
    assert!(stdout.contains("(9 nodes)"));
}
