//! Scenario files: a TOML description of the surveyed polygon, the sensor,
//! the initial swarm and the simulation settings.
//!
//! ```toml
//! [sensor]
//! half_angle_deg = 20.0
//! z_min = 0.3
//! z_max = 2.3
//! quality = "uniform"        # or "paraboloid" with edge_ratio_b
//!
//! [region]
//! vertices = [[0.0, 0.0], [3.0, 0.0], [3.0, 3.0], [0.0, 3.0]]
//!
//! [[nodes]]
//! id = 0
//! x = 1.0
//! y = 1.0
//! z = 0.5
//!
//! [sim]
//! dt = 0.01
//! steps = 20000
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::control::Gains;
use crate::geom::{ConvexPolygon, NodeId, Point2, QuadratureConfig};
use crate::partition::{NodeState, StateError, SwarmState};
use crate::quality::{QualityError, QualityModel, QualityVariant};
use crate::sim::SimConfig;

const CASE_STUDY_1: &str = include_str!("../scenarios/case_study_1.toml");
const CASE_STUDY_2: &str = include_str!("../scenarios/case_study_2.toml");

/// Names accepted by [`bundled`].
pub const BUNDLED: [&str; 2] = ["case_study_1", "case_study_2"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    sensor: RawSensor,
    region: RawRegion,
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    sim: RawSim,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    half_angle_deg: f64,
    z_min: f64,
    z_max: f64,
    #[serde(default = "default_quality")]
    quality: String,
    edge_ratio_b: Option<f64>,
}

fn default_quality() -> String {
    "uniform".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: u32,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSim {
    dt: f64,
    steps: usize,
    record_every: usize,
    alpha_q: f64,
    alpha_z: f64,
    gl_order: usize,
    grid_resolution: usize,
    refine: usize,
    seed: u64,
}

impl Default for RawSim {
    fn default() -> Self {
        let c = SimConfig::default();
        Self {
            dt: c.dt,
            steps: c.steps,
            record_every: c.record_every,
            alpha_q: c.gains.alpha_q,
            alpha_z: c.gains.alpha_z,
            gl_order: c.quadrature.gl_order,
            grid_resolution: c.quadrature.grid_resolution,
            refine: c.quadrature.refine,
            seed: c.seed,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub state: SwarmState,
    pub sim: SimConfig,
    pub output_dir: Option<PathBuf>,
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let fallback = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    parse_scenario_str(&text, &fallback)
}

/// One of the bundled scenarios by name.
pub fn bundled(name: &str) -> Option<Scenario> {
    let text = match name {
        "case_study_1" => CASE_STUDY_1,
        "case_study_2" => CASE_STUDY_2,
        _ => return None,
    };
    Some(parse_scenario_str(text, name).expect("bundled scenarios are valid"))
}

/// A bundled scenario name or a path to a scenario file.
pub fn load(name_or_path: &str) -> Result<Scenario, ScenarioError> {
    let path = Path::new(name_or_path);
    if !path.exists() {
        let stem = name_or_path.trim_end_matches(".toml");
        if let Some(s) = bundled(stem) {
            return Ok(s);
        }
    }
    parse_scenario(path)
}

/// Parses scenario text; `fallback_name` is used when the file has no `name`.
pub fn parse_scenario_str(text: &str, fallback_name: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;

    let s = &raw.sensor;
    let variant = match s.quality.as_str() {
        "uniform" => {
            if s.edge_ratio_b.is_some() {
                return Err(ScenarioError::invalid(
                    "sensor.edge_ratio_b",
                    "only meaningful with quality = \"paraboloid\"",
                ));
            }
            QualityVariant::Uniform
        }
        "paraboloid" => QualityVariant::Paraboloid {
            edge_ratio_b: s.edge_ratio_b.ok_or_else(|| {
                ScenarioError::invalid("sensor.edge_ratio_b", "required for the paraboloid")
            })?,
        },
        other => {
            return Err(ScenarioError::invalid(
                "sensor.quality",
                format!("unknown quality {other:?}; expected \"uniform\" or \"paraboloid\""),
            ))
        }
    };
    if !(s.half_angle_deg > 0.0 && s.half_angle_deg < 90.0) {
        return Err(ScenarioError::invalid(
            "sensor.half_angle_deg",
            format!("{} is not in (0, 90) degrees", s.half_angle_deg),
        ));
    }
    if !(s.z_min > 0.0) {
        return Err(ScenarioError::invalid("sensor.z_min", "must be positive"));
    }
    if !(s.z_max > s.z_min && s.z_max.is_finite()) {
        return Err(ScenarioError::invalid("sensor.z_max", "must exceed z_min"));
    }
    let model = QualityModel::new(s.half_angle_deg.to_radians(), s.z_min, s.z_max, variant)
        .map_err(|e| ScenarioError::invalid("sensor.edge_ratio_b", e.to_string()))?;

    let vertices: Vec<Point2> = raw.region.vertices.iter().map(|v| Point2::new(v[0], v[1])).collect();
    let omega = ConvexPolygon::new(vertices)
        .map_err(|e| ScenarioError::invalid("region.vertices", e.to_string()))?;

    let nodes: Vec<NodeState> = raw
        .nodes
        .iter()
        .map(|n| NodeState {
            id: NodeId(n.id),
            q: Point2::new(n.x, n.y),
            z: n.z,
        })
        .collect();
    let state = SwarmState::new(nodes, model, omega).map_err(|e| {
        let field = match &e {
            StateError::DuplicateId(id) => format!("nodes[{}].id", index_of(&raw.nodes, *id, 1)),
            StateError::Altitude { id, source } => {
                let k = index_of(&raw.nodes, *id, 0);
                match source {
                    QualityError::AltitudeOutOfBand { .. } => format!("nodes[{k}].z"),
                    QualityError::InvalidModel(_) => "sensor".into(),
                }
            }
            StateError::OutsideDomain { id, .. } => {
                format!("nodes[{}].x/y", index_of(&raw.nodes, *id, 0))
            }
        };
        ScenarioError::invalid(field, e.to_string())
    })?;

    let r = &raw.sim;
    let gains = Gains::new(r.alpha_q, r.alpha_z).map_err(|e| {
        let field = if r.alpha_q > 0.0 { "sim.alpha_z" } else { "sim.alpha_q" };
        ScenarioError::invalid(field, e.to_string())
    })?;
    let sim = SimConfig {
        dt: r.dt,
        steps: r.steps,
        gains,
        quadrature: QuadratureConfig {
            gl_order: r.gl_order,
            grid_resolution: r.grid_resolution,
            refine: r.refine,
        },
        seed: r.seed,
        record_every: r.record_every,
    };
    let checks: [(&str, bool); 6] = [
        ("sim.dt", r.dt > 0.0 && r.dt.is_finite()),
        ("sim.steps", r.steps >= 1),
        ("sim.record_every", r.record_every >= 1),
        ("sim.gl_order", r.gl_order >= 1),
        ("sim.grid_resolution", r.grid_resolution >= 1),
        ("sim.refine", r.refine >= 1),
    ];
    if let Some((field, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Err(ScenarioError::invalid(*field, "must be positive"));
    }

    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| fallback_name.to_string()),
        state,
        sim,
        output_dir: raw.output.dir,
    })
}

/// Position of the `nth` (0-based) node entry carrying `id`.
fn index_of(nodes: &[RawNode], id: NodeId, nth: usize) -> usize {
    nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.id == id.0)
        .nth(nth)
        .map(|(k, _)| k)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[sensor]
half_angle_deg = 20.0
z_min = 0.3
z_max = 2.3

[region]
vertices = [[0.0, 0.0], [3.0, 0.0], [3.0, 3.0], [0.0, 3.0]]

[[nodes]]
id = 4
x = 1.0
y = 1.0
z = 0.5
"#;

    #[test]
    fn minimal_file_uses_defaults() {
        let s = parse_scenario_str(MINIMAL, "mini").unwrap();
        assert_eq!(s.name, "mini");
        assert_eq!(s.state.len(), 1);
        assert_eq!(s.sim, SimConfig::default());
        assert!((s.state.model.half_angle() - 20f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn bundled_scenarios_parse() {
        let one = bundled("case_study_1").unwrap();
        assert_eq!(one.state.len(), 3);
        let two = bundled("case_study_2").unwrap();
        assert_eq!(two.state.len(), 9);
        for s in [one, two] {
            assert!((s.state.model.half_angle().to_degrees() - 20.0).abs() < 1e-12);
            assert_eq!((s.state.model.z_min(), s.state.model.z_max()), (0.3, 2.3));
        }
        assert!(bundled("nope").is_none());
    }

    fn field_of(text: &str) -> String {
        match parse_scenario_str(text, "x") {
            Err(ScenarioError::Validation { field, .. }) => field,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn validation_errors_name_the_field() {
        assert_eq!(field_of(&MINIMAL.replace("z = 0.5", "z = 2.5")), "nodes[0].z");
        assert_eq!(field_of(&MINIMAL.replace("x = 1.0", "x = 7.0")), "nodes[0].x/y");
        assert_eq!(
            field_of(&MINIMAL.replace("half_angle_deg = 20.0", "half_angle_deg = 95.0")),
            "sensor.half_angle_deg"
        );
        assert_eq!(
            field_of(&format!("{MINIMAL}\n[sim]\ndt = -1.0\n")),
            "sim.dt"
        );
        assert_eq!(
            field_of(&MINIMAL.replace("z_max = 2.3", "z_max = 2.3\nquality = \"paraboloid\"")),
            "sensor.edge_ratio_b"
        );
    }

    #[test]
    fn malformed_text_is_a_parse_error() {
        assert!(matches!(
            parse_scenario_str("sensor = 3", "x"),
            Err(ScenarioError::Parse(_))
        ));
        assert!(matches!(
            parse_scenario_str(&MINIMAL.replace("z = 0.5", "z = 0.5\nw = 1"), "x"),
            Err(ScenarioError::Parse(_))
        ));
    }
}
