//! Trajectory CSV and metrics JSON.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geom::{NodeId, Point2};
use crate::partition::NodeState;
use crate::sim::TrajectoryLog;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub t: f64,
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u_x: f64,
    pub u_y: f64,
    pub u_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "H_max_form")]
    pub h_max_form: f64,
    #[serde(rename = "H_max_form_bound")]
    pub h_max_form_bound: f64,
    #[serde(rename = "H_over_Hopt")]
    pub h_over_hopt: f64,
    pub covered_area_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub h_opt: f64,
    pub converged: bool,
    pub steps_taken: usize,
    pub clamp_activations: usize,
    pub timeline: Vec<TimelineEntry>,
}

impl Metrics {
    pub fn from_log(log: &TrajectoryLog) -> Self {
        let ratio = |h: f64| if log.h_opt > 0.0 { h / log.h_opt } else { 0.0 };
        Self {
            h_opt: log.h_opt,
            converged: log.converged,
            steps_taken: log.steps_taken,
            clamp_activations: log.clamp_activations,
            timeline: log
                .records
                .iter()
                .map(|r| TimelineEntry {
                    t: r.t,
                    h: r.h,
                    h_max_form: r.h_max_form,
                    h_max_form_bound: r.h_max_form_bound,
                    h_over_hopt: ratio(r.h),
                    covered_area_ratio: r.covered_area_ratio,
                })
                .collect(),
        }
    }
}

pub fn trajectory_rows(log: &TrajectoryLog) -> Vec<TrajectoryRow> {
    log.records
        .iter()
        .flat_map(|r| {
            r.nodes.iter().enumerate().map(move |(k, n)| {
                let u = r.inputs.get(k).copied().unwrap_or([0.0; 3]);
                TrajectoryRow {
                    step: r.step,
                    t: r.t,
                    id: n.id.0,
                    x: n.q.x,
                    y: n.q.y,
                    z: n.z,
                    u_x: u[0],
                    u_y: u[1],
                    u_z: u[2],
                }
            })
        })
        .collect()
}

pub fn write_trajectory_csv(log: &TrajectoryLog, path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for row in trajectory_rows(log) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>, csv::Error> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

/// Node states grouped by recorded step, in step order.
pub fn states_by_step(rows: &[TrajectoryRow]) -> BTreeMap<usize, Vec<NodeState>> {
    let mut out: BTreeMap<usize, Vec<NodeState>> = BTreeMap::new();
    for r in rows {
        out.entry(r.step).or_default().push(NodeState {
            id: NodeId(r.id),
            q: Point2::new(r.x, r.y),
            z: r.z,
        });
    }
    out
}

pub fn write_metrics_json(log: &TrajectoryLog, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &Metrics::from_log(log))?;
    w.write_all(b"\n")?;
    w.flush()
}

pub fn read_metrics_json(path: &Path) -> std::io::Result<Metrics> {
    let f = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}
