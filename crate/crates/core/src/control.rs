//! The gradient control law, evaluated term by term on a node's cell.
//!
//! Planar and altitude inputs each split into three parts: the outward
//! push of the node's own sensing circle where nobody else senses, the
//! interior derivative of its quality over the cell, and the quality gap
//! against neighbors along the stretches of its own circle that run
//! inside another node's disk. Pieces of the cell boundary that lie on the
//! polygon, on a neighbor's circle, or on a dominance curve contribute
//! nothing: either the boundary does not move with the node or the
//! quality gap vanishes along it.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{
    circle_circle_intersection, curve_integral, region_moments, Arc, Curve, Disk,
    GaussLegendre, Label, Point2, QuadratureConfig, Vec2,
};
use crate::par::*;
use crate::partition::{compute_cell, neighbor_set, Cell, CellSet, SwarmState};
use crate::quality::{dominance_boundary, DominanceKind, QualityModel, QualityVariant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("cells were built for a different swarm state")]
    StaleCells,
    #[error("gains must be positive and finite, got alpha_q = {alpha_q}, alpha_z = {alpha_z}")]
    InvalidGains { alpha_q: f64, alpha_z: f64 },
    #[error("altitude input keeps one sign over the band; nearest endpoint is {endpoint}")]
    NoInteriorRoot { endpoint: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub alpha_q: f64,
    pub alpha_z: f64,
}

impl Gains {
    pub fn new(alpha_q: f64, alpha_z: f64) -> Result<Self, ControlError> {
        let ok = |a: f64| a > 0.0 && a.is_finite();
        if ok(alpha_q) && ok(alpha_z) {
            Ok(Self { alpha_q, alpha_z })
        } else {
            Err(ControlError::InvalidGains { alpha_q, alpha_z })
        }
    }
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            alpha_q: 1.0,
            alpha_z: 1.0,
        }
    }
}

/// Unscaled contributions to the input, kept apart for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlTerms {
    pub own_boundary_q: Vec2,
    pub interior_q: Vec2,
    pub neighbor_q: Vec2,
    pub own_boundary_z: f64,
    pub interior_z: f64,
    pub neighbor_z: f64,
}

impl ControlTerms {
    pub fn grad_q(&self) -> Vec2 {
        self.own_boundary_q + self.interior_q + self.neighbor_q
    }

    pub fn grad_z(&self) -> f64 {
        self.own_boundary_z + self.interior_z + self.neighbor_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub u_q: Vec2,
    pub u_z: f64,
    pub terms: ControlTerms,
}

impl ControlInput {
    pub fn from_terms(terms: ControlTerms, gains: Gains) -> Self {
        Self {
            u_q: terms.grad_q() * gains.alpha_q,
            u_z: gains.alpha_z * terms.grad_z(),
            terms,
        }
    }

    /// `‖(u_q, u_z)‖`.
    pub fn norm(&self) -> f64 {
        (self.u_q.norm_sq() + self.u_z * self.u_z).sqrt()
    }
}

/// How a boundary point moves with the node's ground position (`upsilon`,
/// a 2×2 matrix) and altitude (`nu_dot_n`, normal component only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianData {
    pub upsilon: [[f64; 2]; 2],
    pub nu_dot_n: f64,
}

impl JacobianData {
    pub const ZERO: JacobianData = JacobianData {
        upsilon: [[0.0; 2]; 2],
        nu_dot_n: 0.0,
    };

    /// `υᵀ n`.
    pub fn transport(&self, n: Vec2) -> Vec2 {
        let u = self.upsilon;
        Point2::new(u[0][0] * n.x + u[1][0] * n.y, u[0][1] * n.x + u[1][1] * n.y)
    }
}

/// A point on the node's own sensing circle translates with the node and
/// moves outward at rate `tan a` as it climbs.
pub fn jacobian_data_on_own_arc(m: &QualityModel) -> JacobianData {
    JacobianData {
        upsilon: [[1.0, 0.0], [0.0, 1.0]],
        nu_dot_n: m.tan_a(),
    }
}

/// Jacobian data for a cell boundary piece with the given label.
pub fn jacobian_data(m: &QualityModel, label: &Label) -> JacobianData {
    match label {
        Label::OwnSensingCircle => jacobian_data_on_own_arc(m),
        _ => JacobianData::ZERO,
    }
}

/// Control input of node `i`; `cells` must come from this exact state.
pub fn control_input(
    s: &SwarmState,
    i: usize,
    cells: &CellSet,
    gains: Gains,
    quad: &QuadratureConfig,
) -> Result<ControlInput, ControlError> {
    if !cells.is_current_for(s) {
        return Err(ControlError::StaleCells);
    }
    Ok(ControlInput::from_terms(
        gradient_terms(s, i, &cells.cells[i], quad),
        gains,
    ))
}

/// Inputs for every node from one snapshot, in node order.
pub fn control_inputs(
    s: &SwarmState,
    cells: &CellSet,
    gains: Gains,
    quad: &QuadratureConfig,
) -> Result<Vec<ControlInput>, ControlError> {
    if !cells.is_current_for(s) {
        return Err(ControlError::StaleCells);
    }
    Ok((0..s.len())
        .into_par_iter()
        .map(|i| ControlInput::from_terms(gradient_terms(s, i, &cells.cells[i], quad), gains))
        .collect())
}

/// Partial derivatives of the criterion with respect to node `i`'s pose,
/// split by term. `cell` must be node `i`'s cell in `s`.
pub fn gradient_terms(
    s: &SwarmState,
    i: usize,
    cell: &Cell,
    quad: &QuadratureConfig,
) -> ControlTerms {
    let mut t = ControlTerms::default();
    if cell.region.is_empty() {
        return t;
    }
    let m = &s.model;
    let node = &s.nodes[i];
    let rule = GaussLegendre::cached(quad.gl_order);

    let mom = region_moments(&cell.region, node.q, rule);
    t.interior_q = mom.first * m.dq_coefficient(node.z);
    let dz = m.dz_poly(node.z);
    t.interior_z = dz.c0 * mom.area + dz.c2 * mom.second;

    let neighbors = neighbor_set(s, i);
    let cuts = interface_angles(s, i, &neighbors);
    let rim_quality = m.value_poly(node.z).eval(m.sensing_radius(node.z).powi(2));

    for piece in cell.region.pieces() {
        let Curve::Arc(arc) = piece.curve else {
            continue;
        };
        let jac = jacobian_data(m, &piece.label);
        if jac == JacobianData::ZERO {
            continue;
        }
        for sub in split_arc(&arc, &cuts) {
            let mid = sub.point_at_angle(sub.angle_at(0.5));
            let covering = neighbors
                .iter()
                .copied()
                .filter(|&j| s.sensing_disk(j).contains(mid))
                .collect::<Vec<_>>();
            let curve = Curve::Arc(sub);
            if covering.is_empty() {
                let (vq, vz) = pair_integral(&curve, rule, |_, n| {
                    (jac.transport(n) * rim_quality, jac.nu_dot_n * rim_quality)
                });
                t.own_boundary_q += vq;
                t.own_boundary_z += vz;
            } else {
                let (vq, vz) = pair_integral(&curve, rule, |p, n| {
                    let f_out = covering
                        .iter()
                        .map(|&j| m.value(&s.nodes[j], p))
                        .fold(0.0, f64::max);
                    let gap = rim_quality - f_out;
                    (jac.transport(n) * gap, jac.nu_dot_n * gap)
                });
                t.neighbor_q += vq;
                t.neighbor_z += vz;
            }
        }
    }
    t
}

fn pair_integral(
    curve: &Curve,
    rule: &GaussLegendre,
    g: impl Fn(Point2, Vec2) -> (Vec2, f64),
) -> (Vec2, f64) {
    let v = curve_integral(curve, rule, |p, n, _| g(p, n).0);
    let w = curve_integral(curve, rule, |p, n, _| g(p, n).1);
    (v, w)
}

/// Angles on node `i`'s circle where the best neighbor quality can change
/// non-smoothly: neighbor circles and, for the paraboloid, dominance
/// curves between pairs of neighbors.
fn interface_angles(s: &SwarmState, i: usize, neighbors: &[usize]) -> Vec<f64> {
    let ci = s.sensing_disk(i);
    let mut out = Vec::new();
    let on_circle = |out: &mut Vec<f64>, d: &Disk| {
        if let Ok(pts) = circle_circle_intersection(&ci, d) {
            out.extend(pts.iter().map(|p| (*p - ci.center).angle()));
        }
    };
    for &j in neighbors {
        on_circle(&mut out, &s.sensing_disk(j));
    }
    if let QualityVariant::Paraboloid { .. } = s.model.variant() {
        for (a, &j) in neighbors.iter().enumerate() {
            for &k in &neighbors[a + 1..] {
                let (dj, dk) = (s.sensing_disk(j), s.sensing_disk(k));
                if dj.center.distance(dk.center) > dj.radius + dk.radius {
                    continue;
                }
                match dominance_boundary(&s.model, &s.nodes[j], &s.nodes[k]).kind {
                    DominanceKind::Circle(d) => on_circle(&mut out, &d),
                    DominanceKind::Bisector(h) => {
                        // (q_i + R·u(k) − p)·n = 0
                        let c = (ci.center - h.point).dot(h.normal);
                        if c.abs() < ci.radius {
                            let phi = h.normal.angle();
                            let w = (-c / ci.radius).acos();
                            out.push(phi + w);
                            out.push(phi - w);
                        }
                    }
                    DominanceKind::Everywhere | DominanceKind::Nowhere => {}
                }
            }
        }
    }
    out
}

/// Splits a counterclockwise or clockwise arc at the given circle angles.
fn split_arc(arc: &Arc, cuts: &[f64]) -> Vec<Arc> {
    let ext = arc.extent();
    let dir = arc.sweep().signum();
    let mut offs: Vec<f64> = cuts
        .iter()
        .map(|&k| (dir * (k - arc.k_start)).rem_euclid(TAU))
        .filter(|&o| o > 1e-12 && o < ext - 1e-12)
        .collect();
    offs.sort_by(f64::total_cmp);
    offs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut bounds = vec![0.0];
    bounds.extend(offs);
    bounds.push(ext);
    bounds
        .windows(2)
        .map(|w| Arc::new(arc.center, arc.radius, arc.k_start + dir * w[0], dir * (w[1] - w[0])))
        .collect()
}

/// Altitude input of node `i` if it alone were moved to altitude `z`.
fn altitude_input_at(s: &SwarmState, i: usize, z: f64, quad: &QuadratureConfig) -> f64 {
    let mut probe = s.clone();
    probe.nodes[i].z = z;
    let cell = compute_cell(&probe, i);
    gradient_terms(&probe, i, &cell, quad).grad_z()
}

/// Altitude at which node `i`'s altitude input vanishes with every other
/// node held fixed, by bisection over the band. Returns the lower or upper
/// band edge when the input never changes sign.
pub fn stable_altitude(s: &SwarmState, i: usize, quad: &QuadratureConfig) -> f64 {
    let m = &s.model;
    let mut lo = m.z_min();
    let mut hi = m.z_max() - 1e-6 * (m.z_max() - m.z_min());
    let f_lo = altitude_input_at(s, i, lo, quad);
    let f_hi = altitude_input_at(s, i, hi, quad);
    if f_lo <= 0.0 && f_hi <= 0.0 {
        return m.z_min();
    }
    if f_lo >= 0.0 && f_hi >= 0.0 {
        return m.z_max();
    }
    let rising = f_lo < 0.0;
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        let f = altitude_input_at(s, i, mid, quad);
        if f == 0.0 {
            return mid;
        }
        if (f > 0.0) != rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Altitude input of an isolated node whose cell is its whole disk.
pub fn isolated_altitude_input(m: &QualityModel, z: f64) -> f64 {
    let r = m.sensing_radius(z);
    let rim = m.value_poly(z).eval(r * r);
    let dz = m.dz_poly(z);
    m.tan_a() * rim * TAU * r + PI * (dz.c0 * r * r + 0.5 * dz.c2 * r.powi(4))
}

/// Stable altitude of an isolated node, to `1e-10`.
pub fn optimal_altitude(m: &QualityModel) -> Result<f64, ControlError> {
    let mut lo = m.z_min();
    let mut hi = m.z_max() - 1e-6 * (m.z_max() - m.z_min());
    let f_lo = isolated_altitude_input(m, lo);
    let f_hi = isolated_altitude_input(m, hi);
    if f_lo <= 0.0 && f_hi <= 0.0 {
        return Err(ControlError::NoInteriorRoot { endpoint: m.z_min() });
    }
    if f_lo >= 0.0 && f_hi >= 0.0 {
        return Err(ControlError::NoInteriorRoot { endpoint: m.z_max() });
    }
    let rising = f_lo < 0.0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if (isolated_altitude_input(m, mid) > 0.0) != rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
