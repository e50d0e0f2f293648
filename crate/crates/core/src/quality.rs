//! Coverage-quality functions, their derivatives with respect to the
//! node's pose, and the pairwise dominance boundaries.
//!
//! Inside its sensing disk of radius `R = z·tan a` a node's quality is the
//! radial polynomial `c0 + c2·ρ²` with `ρ = ‖q − q_i‖`; outside it is zero.
//! The disk is closed: on its rim the quality takes the inside limit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Disk, HalfPlane, NodeId, Point2, Vec2, EPS};
use crate::partition::NodeState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QualityError {
    #[error("altitude {z} outside band [{z_min}, {z_max}]")]
    AltitudeOutOfBand { z: f64, z_min: f64, z_max: f64 },
    #[error("invalid quality model: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QualityVariant {
    /// Same quality over the whole footprint.
    Uniform,
    /// Inverted paraboloid; `edge_ratio_b` is the rim quality relative to the center.
    Paraboloid { edge_ratio_b: f64 },
}

/// Sensor and quality parameters shared by every node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityModel {
    half_angle: f64,
    z_min: f64,
    z_max: f64,
    variant: QualityVariant,
}

/// `c0 + c2·ρ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoly {
    pub c0: f64,
    pub c2: f64,
}

impl RadialPoly {
    pub fn eval(&self, rho_sq: f64) -> f64 {
        self.c0 + self.c2 * rho_sq
    }
}

impl QualityModel {
    /// `half_angle` in radians.
    pub fn new(
        half_angle: f64,
        z_min: f64,
        z_max: f64,
        variant: QualityVariant,
    ) -> Result<Self, QualityError> {
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(QualityError::InvalidModel(format!(
                "half angle {half_angle} rad not in (0, π/2)"
            )));
        }
        if !(z_min > 0.0 && z_min < z_max && z_max.is_finite()) {
            return Err(QualityError::InvalidModel(format!(
                "altitude band [{z_min}, {z_max}] must satisfy 0 < z_min < z_max"
            )));
        }
        if let QualityVariant::Paraboloid { edge_ratio_b } = variant {
            if !(edge_ratio_b > 0.0 && edge_ratio_b < 1.0) {
                return Err(QualityError::InvalidModel(format!(
                    "edge ratio b = {edge_ratio_b} not in (0, 1)"
                )));
            }
        }
        Ok(Self {
            half_angle,
            z_min,
            z_max,
            variant,
        })
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn tan_a(&self) -> f64 {
        self.half_angle.tan()
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn variant(&self) -> QualityVariant {
        self.variant
    }

    pub fn check_altitude(&self, z: f64) -> Result<(), QualityError> {
        if z >= self.z_min && z <= self.z_max {
            Ok(())
        } else {
            Err(QualityError::AltitudeOutOfBand {
                z,
                z_min: self.z_min,
                z_max: self.z_max,
            })
        }
    }

    pub fn sensing_radius(&self, z: f64) -> f64 {
        z * self.tan_a()
    }

    pub fn sensing_disk(&self, node: &NodeState) -> Disk {
        Disk {
            center: node.q,
            radius: self.sensing_radius(node.z),
        }
    }

    /// Uniform factor `((z−z_min)² − D²)² / D⁴`, `D = z_max − z_min`.
    pub fn peak(&self, z: f64) -> f64 {
        let d = z - self.z_min;
        let span = self.z_max - self.z_min;
        let s = d * d - span * span;
        s * s / span.powi(4)
    }

    pub fn peak_dz(&self, z: f64) -> f64 {
        let d = z - self.z_min;
        let span = self.z_max - self.z_min;
        4.0 * d * (d * d - span * span) / span.powi(4)
    }

    fn flatness(&self) -> f64 {
        match self.variant {
            QualityVariant::Uniform => 0.0,
            QualityVariant::Paraboloid { edge_ratio_b } => 1.0 - edge_ratio_b,
        }
    }

    /// Quality inside the disk as a polynomial in `ρ²`.
    pub fn value_poly(&self, z: f64) -> RadialPoly {
        let f = self.peak(z);
        let r = self.sensing_radius(z);
        RadialPoly {
            c0: f,
            c2: -self.flatness() * f / (r * r),
        }
    }

    /// `∂f/∂z_i` inside the disk as a polynomial in `ρ²`.
    pub fn dz_poly(&self, z: f64) -> RadialPoly {
        let f = self.peak(z);
        let df = self.peak_dz(z);
        let r = self.sensing_radius(z);
        RadialPoly {
            c0: df,
            c2: -self.flatness() * (df - 2.0 * f / z) / (r * r),
        }
    }

    /// `g` with `∂f/∂q_i = g·(q − q_i)` inside the disk.
    pub fn dq_coefficient(&self, z: f64) -> f64 {
        -2.0 * self.value_poly(z).c2
    }

    /// Quality of `node` at `q`; closed disk, no band check.
    pub fn value(&self, node: &NodeState, q: Point2) -> f64 {
        let rho_sq = (q - node.q).norm_sq();
        let r = self.sensing_radius(node.z);
        if rho_sq > r * r * (1.0 + 1e-12) {
            return 0.0;
        }
        self.value_poly(node.z).eval(rho_sq.min(r * r)).max(0.0)
    }

    pub fn grad_q(&self, node: &NodeState, q: Point2) -> Vec2 {
        (q - node.q) * self.dq_coefficient(node.z)
    }

    pub fn grad_z(&self, node: &NodeState, q: Point2) -> f64 {
        self.dz_poly(node.z).eval((q - node.q).norm_sq())
    }
}

/// Quality `f_i(q)`; rejects altitudes outside the band.
pub fn eval_quality(m: &QualityModel, node: &NodeState, q: Point2) -> Result<f64, QualityError> {
    m.check_altitude(node.z)?;
    Ok(m.value(node, q))
}

/// `∂f_i/∂q_i` at a point strictly inside the sensing disk.
pub fn quality_grad_q(m: &QualityModel, node: &NodeState, q: Point2) -> Result<Vec2, QualityError> {
    m.check_altitude(node.z)?;
    Ok(m.grad_q(node, q))
}

/// `∂f_i/∂z_i` at a point strictly inside the sensing disk.
pub fn quality_grad_z(m: &QualityModel, node: &NodeState, q: Point2) -> Result<f64, QualityError> {
    m.check_altitude(node.z)?;
    Ok(m.grad_z(node, q))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DominanceKind {
    /// Circle `f_i = f_j`; `winner_at_center` wins inside it.
    Circle(Disk),
    /// Equal altitudes: the half-plane on node i's side of the perpendicular
    /// bisector of `q_i q_j`.
    Bisector(HalfPlane),
    /// Node i is at least as good wherever both sense.
    Everywhere,
    /// Node j is strictly better wherever both sense.
    Nowhere,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceBoundary {
    pub kind: DominanceKind,
    /// Winner inside the circle, on node i's side of a bisector, or the
    /// overall winner for `Everywhere`/`Nowhere`.
    pub winner_at_center: NodeId,
}

/// Where node i beats node j inside `C_i ∩ C_j`.
///
/// Equal altitudes split along the bisector, with coincident ground points
/// going to the lower id. For the paraboloid, `f_i − f_j` has the form
/// `A·(‖q − m‖² − s)`, so the tie set is a circle about `m` when `s > 0`.
/// A circle larger than `1e4·(R_i + R_j)` is treated as the bisector.
pub fn dominance_boundary(m: &QualityModel, ni: &NodeState, nj: &NodeState) -> DominanceBoundary {
    let everywhere = DominanceBoundary {
        kind: DominanceKind::Everywhere,
        winner_at_center: ni.id,
    };
    let nowhere = DominanceBoundary {
        kind: DominanceKind::Nowhere,
        winner_at_center: nj.id,
    };
    let bisector = || {
        if (nj.q - ni.q).norm() <= EPS {
            if ni.id < nj.id {
                everywhere
            } else {
                nowhere
            }
        } else {
            DominanceBoundary {
                kind: DominanceKind::Bisector(HalfPlane::new(
                    ni.q.lerp(nj.q, 0.5),
                    nj.q - ni.q,
                )),
                winner_at_center: ni.id,
            }
        }
    };
    if (ni.z - nj.z).abs() <= 1e-12 {
        return bisector();
    }
    match m.variant {
        QualityVariant::Uniform => {
            if ni.z < nj.z {
                everywhere
            } else {
                nowhere
            }
        }
        QualityVariant::Paraboloid { .. } => {
            // f_k(q) = F_k + c_k‖q − q_k‖² with c_k < 0 inside the disks.
            let pi = m.value_poly(ni.z);
            let pj = m.value_poly(nj.z);
            // f_i − f_j = a‖q‖² − 2 q·w + k
            let a = pi.c2 - pj.c2;
            let w = ni.q * pi.c2 - nj.q * pj.c2;
            let k = pi.c2 * ni.q.norm_sq() - pj.c2 * nj.q.norm_sq() + pi.c0 - pj.c0;
            // = a(‖q − w/a‖² − s) with s = ‖w/a‖² − k/a
            let center = w * (1.0 / a);
            let s = center.norm_sq() - k / a;
            let (ri, rj) = (m.sensing_radius(ni.z), m.sensing_radius(nj.z));
            if s <= 0.0 {
                // sign of f_i − f_j is the sign of a everywhere
                return if a > 0.0 { everywhere } else { nowhere };
            }
            let radius = s.sqrt();
            if radius > 1e4 * (ri + rj) {
                return bisector();
            }
            DominanceBoundary {
                kind: DominanceKind::Circle(Disk { center, radius }),
                winner_at_center: if a < 0.0 { ni.id } else { nj.id },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(variant: QualityVariant) -> QualityModel {
        QualityModel::new(20f64.to_radians(), 0.3, 2.3, variant).unwrap()
    }

    fn node(id: u32, x: f64, y: f64, z: f64) -> NodeState {
        NodeState {
            id: NodeId(id),
            q: Point2::new(x, y),
            z,
        }
    }

    #[test]
    fn uniform_values() {
        let m = model(QualityVariant::Uniform);
        let q0 = Point2::ZERO;
        assert!((eval_quality(&m, &node(0, 0.0, 0.0, 0.3), q0).unwrap() - 1.0).abs() < 1e-15);
        assert!(eval_quality(&m, &node(0, 0.0, 0.0, 2.3), q0).unwrap().abs() < 1e-15);
        let n = node(0, 0.0, 0.0, 1.3);
        assert!((eval_quality(&m, &n, Point2::new(0.1, 0.2)).unwrap() - 0.5625).abs() < 1e-15);
        assert_eq!(m.value(&n, Point2::new(1.0, 0.0)), 0.0);
        assert!((quality_grad_z(&m, &n, q0).unwrap() + 0.75).abs() < 1e-15);
        assert_eq!(quality_grad_z(&m, &node(0, 0.0, 0.0, 0.3), q0).unwrap(), 0.0);
        assert_eq!(quality_grad_q(&m, &n, Point2::new(0.1, 0.0)).unwrap(), Point2::ZERO);
    }

    #[test]
    fn out_of_band_altitude_is_rejected() {
        let m = model(QualityVariant::Uniform);
        assert!(matches!(
            eval_quality(&m, &node(0, 0.0, 0.0, 2.5), Point2::ZERO),
            Err(QualityError::AltitudeOutOfBand { .. })
        ));
    }

    #[test]
    fn invalid_models() {
        assert!(QualityModel::new(0.0, 0.3, 2.3, QualityVariant::Uniform).is_err());
        assert!(QualityModel::new(0.3, 2.3, 0.3, QualityVariant::Uniform).is_err());
        assert!(QualityModel::new(
            0.3,
            0.3,
            2.3,
            QualityVariant::Paraboloid { edge_ratio_b: 1.0 }
        )
        .is_err());
    }

    #[test]
    fn paraboloid_rim_is_b_times_uniform() {
        let b = 0.4;
        let m = model(QualityVariant::Paraboloid { edge_ratio_b: b });
        let n = node(0, 1.0, -1.0, 0.9);
        let r = m.sensing_radius(0.9);
        let rim = n.q + Point2::from_angle(0.7) * r;
        assert!((m.value(&n, rim) - b * m.peak(0.9)).abs() < 1e-14);
        assert_eq!(m.grad_q(&n, n.q), Point2::ZERO);
    }

    #[test]
    fn uniform_dominance_by_altitude() {
        let m = model(QualityVariant::Uniform);
        let lo = node(1, 0.0, 0.0, 0.8);
        let hi = node(2, 0.3, 0.0, 1.2);
        assert_eq!(dominance_boundary(&m, &lo, &hi).kind, DominanceKind::Everywhere);
        assert_eq!(dominance_boundary(&m, &hi, &lo).kind, DominanceKind::Nowhere);
        let twin = node(3, 0.3, 0.0, 0.8);
        match dominance_boundary(&m, &lo, &twin).kind {
            DominanceKind::Bisector(h) => {
                assert!(h.contains(lo.q) && !h.contains(twin.q));
                assert!((h.point.x - 0.15).abs() < 1e-15);
            }
            k => panic!("expected bisector, got {k:?}"),
        }
    }

    #[test]
    fn coincident_twins_go_to_lower_id() {
        let m = model(QualityVariant::Uniform);
        let a = node(1, 0.0, 0.0, 0.8);
        let b = node(2, 0.0, 0.0, 0.8);
        assert_eq!(dominance_boundary(&m, &a, &b).kind, DominanceKind::Everywhere);
        assert_eq!(dominance_boundary(&m, &b, &a).kind, DominanceKind::Nowhere);
    }

    #[test]
    fn paraboloid_equal_altitudes_use_bisector() {
        let m = model(QualityVariant::Paraboloid { edge_ratio_b: 0.5 });
        let a = node(1, 0.0, 0.0, 1.0);
        let b = node(2, 0.2, 0.1, 1.0);
        assert!(matches!(
            dominance_boundary(&m, &a, &b).kind,
            DominanceKind::Bisector(_)
        ));
    }
}
