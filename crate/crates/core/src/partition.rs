//! Responsibility cells: each node keeps the part of its clipped sensing
//! disk where no neighbor offers strictly better quality.

use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{
    boolean, clip_disk_to_polygon, region_boolean, ArcRegion, BoolOp, ConvexPolygon, Disk,
    HalfPlane, Label, NodeId, Point2, Primitive,
};
use crate::par::*;
use crate::quality::{dominance_boundary, DominanceKind, QualityError, QualityModel};

/// Ground position and altitude of one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub q: Point2,
    pub z: f64,
}

impl NodeState {
    pub fn new(id: u32, x: f64, y: f64, z: f64) -> Self {
        Self {
            id: NodeId(id),
            q: Point2::new(x, y),
            z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("node {id}: {source}")]
    Altitude { id: NodeId, source: QualityError },
    #[error("node {id} at ({x}, {y}) lies outside the surveyed polygon")]
    OutsideDomain { id: NodeId, x: f64, y: f64 },
}

/// How far outside the polygon a node may sit and still count as inside.
const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub nodes: Vec<NodeState>,
    pub model: QualityModel,
    pub omega: ConvexPolygon,
}

impl SwarmState {
    pub fn new(
        nodes: Vec<NodeState>,
        model: QualityModel,
        omega: ConvexPolygon,
    ) -> Result<Self, StateError> {
        let s = Self {
            nodes,
            model,
            omega,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), StateError> {
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id) {
                return Err(StateError::DuplicateId(n.id));
            }
            self.model
                .check_altitude(n.z)
                .map_err(|source| StateError::Altitude { id: n.id, source })?;
            if !n.q.is_finite() || self.omega.signed_distance(n.q) < -DOMAIN_SLACK {
                return Err(StateError::OutsideDomain {
                    id: n.id,
                    x: n.q.x,
                    y: n.q.y,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn sensing_disk(&self, i: usize) -> Disk {
        self.model.sensing_disk(&self.nodes[i])
    }

    /// Hash of every node pose, bit for bit.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.nodes.len().hash(&mut h);
        for n in &self.nodes {
            n.id.hash(&mut h);
            n.q.x.to_bits().hash(&mut h);
            n.q.y.to_bits().hash(&mut h);
            n.z.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// Index of the node whose quality is highest at `q`, if any node senses it.
    ///
    /// Ties go to the node with the nearer ground position, then to the lower id.
    pub fn owner_at(&self, q: Point2) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, n) in self.nodes.iter().enumerate() {
            let r = self.model.sensing_radius(n.z);
            if (q - n.q).norm_sq() > r * r {
                continue;
            }
            let f = self.model.value(n, q);
            best = match best {
                None => Some((k, f)),
                Some((b, fb)) => {
                    let nb = &self.nodes[b];
                    let better = if (f - fb).abs() <= 1e-12 * fb.abs().max(1e-300) {
                        let (d, db) = ((q - n.q).norm_sq(), (q - nb.q).norm_sq());
                        d < db || (d == db && n.id < nb.id)
                    } else {
                        f > fb
                    };
                    if better {
                        Some((k, f))
                    } else {
                        Some((b, fb))
                    }
                }
            };
        }
        best.map(|(k, _)| k)
    }

    /// `max_i f_i(q)`.
    pub fn max_quality(&self, q: Point2) -> f64 {
        self.nodes
            .iter()
            .map(|n| self.model.value(n, q))
            .fold(0.0, f64::max)
    }
}

/// Indices `j ≠ i` whose closed sensing disk meets node i's.
pub fn neighbor_set(s: &SwarmState, i: usize) -> Vec<usize> {
    let ni = &s.nodes[i];
    let tan_a = s.model.tan_a();
    s.nodes
        .iter()
        .enumerate()
        .filter(|&(j, nj)| j != i && ni.q.distance(nj.q) <= (ni.z + nj.z) * tan_a)
        .map(|(j, _)| j)
        .collect()
}

/// Radius of the sphere around a node at altitude `z` containing every
/// node whose sensing disk can touch its own.
pub fn comm_radius(m: &QualityModel, z: f64) -> f64 {
    let t = m.tan_a();
    let reach = |zj: f64| ((z + zj) * (z + zj) * t * t + (z - zj) * (z - zj)).sqrt();
    (2.0 * z * t).max(reach(m.z_min())).max(reach(m.z_max()))
}

/// Cell of one node with its fully labeled boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub owner: NodeId,
    pub region: ArcRegion,
    pub neighbor_ids: Vec<NodeId>,
}

impl Cell {
    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.region.area()
    }
}

/// Cells of every node, tied to the state they were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSet {
    pub fingerprint: u64,
    pub cells: Vec<Cell>,
}

impl CellSet {
    pub fn is_current_for(&self, s: &SwarmState) -> bool {
        self.fingerprint == s.fingerprint() && self.cells.len() == s.len()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(Cell::area).sum()
    }
}

/// The region of `C_j` where node j beats node i, with its boundary labeled
/// from node i's point of view.
fn lost_to(s: &SwarmState, i: usize, j: usize) -> Option<ArcRegion> {
    let (ni, nj) = (&s.nodes[i], &s.nodes[j]);
    let cj = s.sensing_disk(j);
    let dom = Label::DominanceVs(nj.id);
    let disk_j = ArcRegion::from_disk(&cj, dom);
    match dominance_boundary(&s.model, ni, nj).kind {
        DominanceKind::Everywhere => None,
        DominanceKind::Nowhere => Some(disk_j),
        DominanceKind::Bisector(h) => {
            let far_side = HalfPlane::new(h.point, -h.normal);
            Some(region_boolean(
                BoolOp::Intersect,
                &disk_j,
                Primitive::HalfPlane(far_side),
                Label::TieBisectorVs(nj.id),
            ))
        }
        DominanceKind::Circle(d) => {
            let circle = ArcRegion::from_disk(&d, dom);
            let i_wins_inside = (s.model.value_poly(ni.z).c2 - s.model.value_poly(nj.z).c2) < 0.0;
            let op = if i_wins_inside {
                BoolOp::Subtract
            } else {
                BoolOp::Intersect
            };
            Some(boolean(op, &disk_j, &circle))
        }
    }
}

/// Cell of node `i`: its disk clipped to the polygon, minus everything a
/// neighbor covers better.
pub fn compute_cell(s: &SwarmState, i: usize) -> Cell {
    let neighbors = neighbor_set(s, i);
    compute_cell_among(s, i, &neighbors)
}

/// Cell of node `i` considering only the listed neighbors.
pub fn compute_cell_among(s: &SwarmState, i: usize, neighbors: &[usize]) -> Cell {
    let mut region = clip_disk_to_polygon(&s.sensing_disk(i), &s.omega);
    for &j in neighbors {
        if region.is_empty() {
            break;
        }
        if let Some(lost) = lost_to(s, i, j) {
            region = boolean(BoolOp::Subtract, &region, &lost);
        }
    }
    Cell {
        owner: s.nodes[i].id,
        region,
        neighbor_ids: neighbors.iter().map(|&j| s.nodes[j].id).collect(),
    }
}

/// Cells for all nodes, in node order.
pub fn compute_all_cells(s: &SwarmState) -> CellSet {
    let cells = (0..s.len())
        .into_par_iter()
        .map(|i| compute_cell(s, i))
        .collect();
    CellSet {
        fingerprint: s.fingerprint(),
        cells,
    }
}

/// Pairs `(inner, outer)` where one sensing disk lies wholly inside another.
pub fn containment_pairs(s: &SwarmState) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    for (i, ni) in s.nodes.iter().enumerate() {
        for (j, nj) in s.nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            let (di, dj) = (s.sensing_disk(i), s.sensing_disk(j));
            let strictly_smaller = di.radius < dj.radius || (di.radius == dj.radius && i > j);
            if strictly_smaller && di.center.distance(dj.center) + di.radius <= dj.radius {
                out.push((ni.id, nj.id));
            }
        }
    }
    out
}

/// Logs a warning for each contained sensing disk; returns how many there were.
pub fn warn_on_containment(s: &SwarmState) -> usize {
    let pairs = containment_pairs(s);
    for (inner, outer) in &pairs {
        warn!(
            "sensing disk of node {inner} lies inside that of node {outer}; \
             the gradient flow may not separate them"
        );
    }
    pairs.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quality::QualityVariant;

    fn state(nodes: Vec<NodeState>) -> SwarmState {
        let m = QualityModel::new(20f64.to_radians(), 0.3, 2.3, QualityVariant::Uniform).unwrap();
        let omega =
            ConvexPolygon::rectangle(Point2::new(-5.0, -5.0), Point2::new(5.0, 5.0)).unwrap();
        SwarmState::new(nodes, m, omega).unwrap()
    }

    #[test]
    fn neighbor_examples() {
        let s = state(vec![
            NodeState::new(0, -4.0, 0.0, 1.0),
            NodeState::new(1, 4.0, 0.0, 1.0),
        ]);
        assert!(neighbor_set(&s, 0).is_empty());
        let s = state(vec![
            NodeState::new(0, 0.0, 0.0, 0.5),
            NodeState::new(1, 0.0, 0.0, 2.0),
        ]);
        assert_eq!(neighbor_set(&s, 0), vec![1]);
        let t = 20f64.to_radians().tan();
        let s = state(vec![
            NodeState::new(0, 0.0, 0.0, 1.0),
            NodeState::new(1, 2.0 * t, 0.0, 1.0),
        ]);
        assert_eq!(neighbor_set(&s, 0), vec![1]);
    }

    #[test]
    fn validation_names_the_problem() {
        let m = QualityModel::new(0.3, 0.3, 2.3, QualityVariant::Uniform).unwrap();
        let omega = ConvexPolygon::rectangle(Point2::ZERO, Point2::new(1.0, 1.0)).unwrap();
        let dup = vec![NodeState::new(0, 0.5, 0.5, 1.0), NodeState::new(0, 0.2, 0.5, 1.0)];
        assert!(matches!(
            SwarmState::new(dup, m, omega.clone()),
            Err(StateError::DuplicateId(_))
        ));
        let high = vec![NodeState::new(0, 0.5, 0.5, 2.5)];
        assert!(matches!(
            SwarmState::new(high, m, omega.clone()),
            Err(StateError::Altitude { .. })
        ));
        let out = vec![NodeState::new(0, 1.5, 0.5, 1.0)];
        assert!(matches!(
            SwarmState::new(out, m, omega),
            Err(StateError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn single_node_cell_is_clipped_disk() {
        let s = state(vec![NodeState::new(0, 0.0, 0.0, 1.0)]);
        let cells = compute_all_cells(&s);
        let r = s.model.sensing_radius(1.0);
        assert!((cells.cells[0].area() - std::f64::consts::PI * r * r).abs() < 1e-12);
        assert!(cells
            .cells[0]
            .region
            .pieces()
            .all(|p| p.label == Label::OwnSensingCircle));
    }

    #[test]
    fn contained_lower_disk_keeps_its_disk() {
        let s = state(vec![
            NodeState::new(0, 0.1, 0.0, 0.5),
            NodeState::new(1, 0.0, 0.0, 2.0),
        ]);
        let cells = compute_all_cells(&s);
        let (ri, rj) = (s.model.sensing_radius(0.5), s.model.sensing_radius(2.0));
        let pi = std::f64::consts::PI;
        assert!((cells.cells[0].area() - pi * ri * ri).abs() < 1e-12);
        assert!((cells.cells[1].area() - pi * (rj * rj - ri * ri)).abs() < 1e-12);
        assert_eq!(cells.cells[1].region.loops.len(), 2);
        assert_eq!(containment_pairs(&s), vec![(NodeId(0), NodeId(1))]);
    }

    #[test]
    fn fully_covered_higher_node_has_empty_cell() {
        let mut nodes = vec![NodeState::new(0, 0.0, 0.0, 0.6)];
        for (k, (x, y)) in [(0.1, 0.1), (-0.1, 0.1), (-0.1, -0.1), (0.1, -0.1)]
            .into_iter()
            .enumerate()
        {
            nodes.push(NodeState::new(k as u32 + 1, x, y, 0.5));
        }
        let s = state(nodes);
        let cells = compute_all_cells(&s);
        assert!(cells.cells[0].is_empty());
        assert!(cells.cells[1..].iter().all(|c| !c.is_empty()));
        assert!(cells.cells.iter().all(|c| c.region.max_chain_gap() < 1e-6));
    }

    #[test]
    fn fingerprint_tracks_every_bit() {
        let mut s = state(vec![NodeState::new(0, 0.0, 0.0, 1.0)]);
        let f = s.fingerprint();
        s.nodes[0].z = f64::from_bits(1.0f64.to_bits() + 1);
        assert_ne!(f, s.fingerprint());
    }
}
