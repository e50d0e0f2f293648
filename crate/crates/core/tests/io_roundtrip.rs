use uavcov::io::{read_metrics_json, read_trajectory_csv, states_by_step, write_metrics_json, write_trajectory_csv};
use uavcov::partition::SwarmState;
use uavcov::scenario::bundled;
use uavcov::sim::{criterion, run, SimConfig};

#[test]
fn csv_reproduces_the_logged_criterion() {
    let sc = bundled("case_study_1").unwrap();
    let cfg = SimConfig {
        steps: 400,
        record_every: 25,
        ..sc.sim
    };
    let log = run(&sc.state, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trajectory.csv");
    let json = dir.path().join("metrics.json");
    write_trajectory_csv(&log, &csv).unwrap();
    write_metrics_json(&log, &json).unwrap();

    let rows = read_trajectory_csv(&csv).unwrap();
    assert_eq!(rows.len(), log.records.len() * sc.state.len());
    let by_step = states_by_step(&rows);
    let metrics = read_metrics_json(&json).unwrap();
    assert_eq!(metrics.timeline.len(), by_step.len());
    assert_eq!(metrics.steps_taken, log.steps_taken);

    for ((_, nodes), entry) in by_step.iter().zip(&metrics.timeline) {
        let s = SwarmState::new(nodes.clone(), sc.state.model, sc.state.omega.clone()).unwrap();
        assert!((criterion(&s) - entry.h).abs() < 1e-9);
        assert!((entry.h / metrics.h_opt - entry.h_over_hopt).abs() < 1e-12);
    }
    let text = std::fs::read_to_string(&json).unwrap();
    for key in ["\"H\"", "\"H_max_form\"", "\"H_over_Hopt\"", "\"covered_area_ratio\""] {
        assert!(text.contains(key), "{key}");
    }
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("step,t,id,x,y,z,u_x,u_y,u_z"));
}
