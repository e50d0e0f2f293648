//! Time integration of the swarm and the coverage-quality criterion.

use std::f64::consts::PI;

use log::{debug, info};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{control_inputs, optimal_altitude, ControlError, ControlInput, Gains};
use crate::geom::{
    grid_integrate, region_moments, Curve, GaussLegendre, Point2, QuadratureConfig, Segment,
};
use crate::partition::{compute_all_cells, CellSet, NodeState, SwarmState};
use crate::quality::{QualityModel, QualityVariant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Control(#[from] ControlError),
}

/// Altitudes are kept this far inside the band after each step.
pub const BAND_MARGIN: f64 = 1e-9;
/// Largest input norm at which a run is declared converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub dt: f64,
    pub steps: usize,
    pub gains: Gains,
    pub quadrature: QuadratureConfig,
    pub seed: u64,
    pub record_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            steps: 20_000,
            gains: Gains::default(),
            quadrature: QuadratureConfig::default(),
            seed: 0,
            record_every: 50,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::InvalidConfig(format!("dt = {} must be positive", self.dt)));
        }
        if self.steps == 0 {
            return Err(SimError::InvalidConfig("steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(SimError::InvalidConfig("record_every must be at least 1".into()));
        }
        Gains::new(self.gains.alpha_q, self.gains.alpha_z)?;
        if self.quadrature.gl_order == 0 || self.quadrature.grid_resolution == 0 {
            return Err(SimError::InvalidConfig(
                "quadrature orders must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `H = Σ_i ∫_{W_i} f_i`, exactly, from the area moments of each cell.
pub fn evaluate_criterion(s: &SwarmState, cells: &CellSet) -> Result<f64, ControlError> {
    if !cells.is_current_for(s) {
        return Err(ControlError::StaleCells);
    }
    let rule = GaussLegendre::cached(QuadratureConfig::default().gl_order);
    Ok(s
        .nodes
        .iter()
        .zip(&cells.cells)
        .filter(|(_, c)| !c.is_empty())
        .map(|(n, c)| {
            let mom = region_moments(&c.region, n.q, rule);
            let f = s.model.value_poly(n.z);
            f.c0 * mom.area + f.c2 * mom.second
        })
        .sum())
}

/// Builds the cells and evaluates the criterion.
pub fn criterion(s: &SwarmState) -> f64 {
    let cells = compute_all_cells(s);
    evaluate_criterion(s, &cells).unwrap_or(0.0)
}

/// Criterion value with a bound on its quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionEstimate {
    pub value: f64,
    pub error_bound: f64,
}

/// `∫_Ω max_i f_i` by grid quadrature, independent of the partition.
///
/// Sub-cells crossing a sensing circle or a polygon edge are refined;
/// for the paraboloid the pairwise dominance circles are refined too,
/// and the curvature of the quality adds a midpoint-rule term to the bound.
pub fn evaluate_criterion_max_form(s: &SwarmState, resolution: usize) -> CriterionEstimate {
    evaluate_criterion_max_form_with(s, resolution, QuadratureConfig::default().refine)
}

pub fn evaluate_criterion_max_form_with(
    s: &SwarmState,
    resolution: usize,
    refine: usize,
) -> CriterionEstimate {
    if s.is_empty() {
        return CriterionEstimate {
            value: 0.0,
            error_bound: 0.0,
        };
    }
    let m = &s.model;
    let mut edges: Vec<Curve> = s
        .omega
        .edges()
        .map(|(a, b)| Curve::Segment(Segment::new(a, b)))
        .collect();
    for i in 0..s.len() {
        edges.push(Curve::Arc(s.sensing_disk(i).boundary(crate::geom::Orientation::Ccw)));
    }
    let mut curvature: f64 = 0.0;
    if let QualityVariant::Paraboloid { .. } = m.variant() {
        for (i, ni) in s.nodes.iter().enumerate() {
            curvature = curvature.max(-m.value_poly(ni.z).c2);
            for j in i + 1..s.len() {
                let nj = &s.nodes[j];
                if let crate::quality::DominanceKind::Circle(d) =
                    crate::quality::dominance_boundary(m, ni, nj).kind
                {
                    let (di, dj) = (s.sensing_disk(i), s.sensing_disk(j));
                    if di.center.distance(dj.center) <= di.radius + dj.radius {
                        edges.push(Curve::Arc(d.boundary(crate::geom::Orientation::Ccw)));
                    }
                }
            }
        }
    }
    let jump = s
        .nodes
        .iter()
        .map(|n| m.peak(n.z))
        .fold(0.0, f64::max);
    let est = grid_integrate(
        s.omega.bbox(),
        resolution,
        refine,
        &edges,
        jump,
        |p| s.omega.contains(p),
        |p| s.max_quality(p),
    );
    let h = est.sub_cell_size * refine as f64;
    // midpoint error of c·ρ² over an h×h cell is c·h⁴/6
    let smooth = curvature * s.omega.area() * h * h / 6.0;
    CriterionEstimate {
        value: est.value,
        error_bound: est.discontinuity_bound + smooth,
    }
}

/// Criterion value with every node isolated at the optimal altitude.
pub fn h_opt(m: &QualityModel, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = optimal_altitude(m).unwrap_or_else(|e| match e {
        ControlError::NoInteriorRoot { endpoint } => endpoint,
        _ => m.z_min(),
    });
    n as f64 * isolated_criterion(m, z)
}

/// `∫ f` over a full sensing disk at altitude `z`.
pub fn isolated_criterion(m: &QualityModel, z: f64) -> f64 {
    let r = m.sensing_radius(z);
    let p = m.value_poly(z);
    PI * (p.c0 * r * r + 0.5 * p.c2 * r.powi(4))
}

/// `Σ area(W_i) / area(Ω)`.
pub fn covered_area_ratio(s: &SwarmState, cells: &CellSet) -> f64 {
    cells.total_area() / s.omega.area()
}

/// Everything produced by one integration step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub next: SwarmState,
    /// Cells and inputs of the state the step started from.
    pub cells: CellSet,
    pub inputs: Vec<ControlInput>,
    /// Number of altitude updates that had to be clamped into the band.
    pub clamps: usize,
}

/// One forward-Euler step with all inputs taken from the same snapshot.
pub fn step_detailed(s: &SwarmState, cfg: &SimConfig) -> Result<StepReport, SimError> {
    let cells = compute_all_cells(s);
    let inputs = control_inputs(s, &cells, cfg.gains, &cfg.quadrature)?;
    let (next, clamps) = apply_inputs(s, &inputs, cfg.dt);
    Ok(StepReport {
        next,
        cells,
        inputs,
        clamps,
    })
}

/// Next state after one step.
pub fn step(s: &SwarmState, cfg: &SimConfig) -> Result<SwarmState, SimError> {
    Ok(step_detailed(s, cfg)?.next)
}

fn apply_inputs(s: &SwarmState, inputs: &[ControlInput], dt: f64) -> (SwarmState, usize) {
    let m = &s.model;
    let (lo, hi) = (m.z_min() + BAND_MARGIN, m.z_max() - BAND_MARGIN);
    let mut next = s.clone();
    let mut clamps = 0;
    for (n, u) in next.nodes.iter_mut().zip(inputs) {
        n.q = s.omega.project(n.q + u.u_q * dt);
        let z = n.z + u.u_z * dt;
        if z < lo || z > hi {
            clamps += 1;
        }
        n.z = z.clamp(lo, hi);
    }
    (next, clamps)
}

/// One recorded sample of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub step: usize,
    pub t: f64,
    pub nodes: Vec<NodeState>,
    pub inputs: Vec<[f64; 3]>,
    pub h: f64,
    pub h_max_form: f64,
    pub h_max_form_bound: f64,
    pub covered_area_ratio: f64,
}

impl Record {
    pub fn input_norms(&self) -> Vec<f64> {
        self.inputs
            .iter()
            .map(|u| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub records: Vec<Record>,
    /// Criterion after every step, starting with the initial state.
    pub h_series: Vec<f64>,
    /// Altitude of every node after every step, starting with the initial state.
    pub altitude_series: Vec<Vec<f64>>,
    pub h_opt: f64,
    pub dt: f64,
    pub converged: bool,
    pub steps_taken: usize,
    pub clamp_activations: usize,
    pub final_state: SwarmState,
}

impl TrajectoryLog {
    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    /// Largest single-step drop of the criterion (zero if it never drops).
    pub fn worst_decrease(&self) -> f64 {
        self.h_series
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

/// Runs until convergence or `cfg.steps` steps.
pub fn run(initial: &SwarmState, cfg: &SimConfig) -> Result<TrajectoryLog, SimError> {
    run_with_observer(initial, cfg, |_| {})
}

/// As [`run`], calling `observer` on every record as it is produced.
pub fn run_with_observer(
    initial: &SwarmState,
    cfg: &SimConfig,
    mut observer: impl FnMut(&Record),
) -> Result<TrajectoryLog, SimError> {
    cfg.validate()?;
    let h_best = h_opt(&initial.model, initial.len());
    let mut log = TrajectoryLog {
        records: Vec::new(),
        h_series: Vec::new(),
        altitude_series: Vec::new(),
        h_opt: h_best,
        dt: cfg.dt,
        converged: false,
        steps_taken: 0,
        clamp_activations: 0,
        final_state: initial.clone(),
    };
    if initial.is_empty() {
        log.converged = true;
        log.h_series.push(0.0);
        log.altitude_series.push(Vec::new());
        let cells = compute_all_cells(initial);
        let rec = record(initial, &cells, &[], 0, 0.0, cfg);
        observer(&rec);
        log.records.push(rec);
        return Ok(log);
    }

    let mut state = initial.clone();
    let mut k = 0;
    loop {
        let cells = compute_all_cells(&state);
        let inputs = control_inputs(&state, &cells, cfg.gains, &cfg.quadrature)?;
        let h = evaluate_criterion(&state, &cells)?;
        log.h_series.push(h);
        log.altitude_series.push(state.nodes.iter().map(|n| n.z).collect());
        let max_u = inputs.iter().map(ControlInput::norm).fold(0.0, f64::max);
        let done = max_u < CONVERGENCE_TOL || k == cfg.steps;
        if k % cfg.record_every == 0 || done {
            let rec = record(&state, &cells, &inputs, k, h, cfg);
            debug!(
                "step {k}: H = {:.9}, H/H_opt = {:.6}, max |u| = {max_u:.3e}",
                rec.h,
                rec.h / h_best
            );
            observer(&rec);
            log.records.push(rec);
        }
        if done {
            log.converged = max_u < CONVERGENCE_TOL;
            break;
        }
        let (next, clamps) = apply_inputs(&state, &inputs, cfg.dt);
        log.clamp_activations += clamps;
        state = next;
        k += 1;
    }
    info!(
        "{} after {k} steps; H/H_opt = {:.6}",
        if log.converged { "converged" } else { "stopped" },
        log.h_series.last().copied().unwrap_or(0.0) / h_best
    );
    log.steps_taken = k;
    log.final_state = state;
    Ok(log)
}

fn record(
    s: &SwarmState,
    cells: &CellSet,
    inputs: &[ControlInput],
    k: usize,
    h: f64,
    cfg: &SimConfig,
) -> Record {
    let max_form = evaluate_criterion_max_form_with(
        s,
        cfg.quadrature.grid_resolution,
        cfg.quadrature.refine,
    );
    Record {
        step: k,
        t: k as f64 * cfg.dt,
        nodes: s.nodes.clone(),
        inputs: inputs.iter().map(|u| [u.u_q.x, u.u_q.y, u.u_z]).collect(),
        h,
        h_max_form: max_form.value,
        h_max_form_bound: max_form.error_bound,
        covered_area_ratio: covered_area_ratio(s, cells),
    }
}

/// Analytic and finite-difference gradient of the criterion for one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub id: crate::geom::NodeId,
    pub analytic: [f64; 3],
    pub numeric: [f64; 3],
    pub max_rel_error: f64,
}

/// Relative error with a floor: components much smaller than the node's
/// whole gradient are compared against that gradient instead.
pub fn relative_error(analytic: f64, numeric: f64, scale: f64) -> f64 {
    (analytic - numeric).abs() / numeric.abs().max(1e-3 * scale).max(1e-300)
}

/// Compares every node's gradient terms with central differences of the
/// criterion at step `h`.
pub fn gradient_check(s: &SwarmState, h: f64, quad: &QuadratureConfig) -> Vec<GradientCheck> {
    let cells = compute_all_cells(s);
    (0..s.len())
        .map(|i| {
            let t = crate::control::gradient_terms(s, i, &cells.cells[i], quad);
            let analytic = [t.grad_q().x, t.grad_q().y, t.grad_z()];
            let mut numeric = [0.0; 3];
            for (c, slot) in numeric.iter_mut().enumerate() {
                let shifted = |d: f64| {
                    let mut p = s.clone();
                    match c {
                        0 => p.nodes[i].q += Point2::new(d, 0.0),
                        1 => p.nodes[i].q += Point2::new(0.0, d),
                        _ => p.nodes[i].z += d,
                    }
                    criterion(&p)
                };
                *slot = (shifted(h) - shifted(-h)) / (2.0 * h);
            }
            let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
            let max_rel_error = (0..3)
                .map(|c| relative_error(analytic[c], numeric[c], scale))
                .fold(0.0, f64::max);
            GradientCheck {
                id: s.nodes[i].id,
                analytic,
                numeric,
                max_rel_error,
            }
        })
        .collect()
}
