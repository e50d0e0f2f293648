use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::curve::{Curve, Disk, Orientation, Segment};
use super::point::{BBox, Point2};
use super::polygon::ConvexPolygon;

/// Identity of a node in the swarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Provenance of a boundary piece of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    /// Arc of the owner's own sensing circle.
    OwnSensingCircle,
    /// Edge of the surveyed polygon.
    WorldBoundary,
    /// Curve where the named neighbor starts to dominate.
    DominanceVs(NodeId),
    /// Equal-altitude bisector against the named neighbor.
    TieBisectorVs(NodeId),
}

impl Label {
    pub fn class_index(&self) -> usize {
        match self {
            Label::OwnSensingCircle => 0,
            Label::WorldBoundary => 1,
            Label::DominanceVs(_) => 2,
            Label::TieBisectorVs(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPiece {
    pub curve: Curve,
    pub label: Label,
}

impl BoundaryPiece {
    pub fn new(curve: Curve, label: Label) -> Self {
        Self { curve, label }
    }
}

/// Planar region bounded by closed chains of arcs and segments.
///
/// Every piece keeps the region on its left, so outer loops run
/// counterclockwise and holes clockwise. Area, boundary integrals and
/// point membership are sums over pieces and do not depend on how the
/// pieces are grouped into loops.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ArcRegion {
    pub loops: Vec<Vec<BoundaryPiece>>,
}

impl ArcRegion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_disk(d: &Disk, label: Label) -> Self {
        Self {
            loops: vec![vec![BoundaryPiece::new(
                Curve::Arc(d.boundary(Orientation::Ccw)),
                label,
            )]],
        }
    }

    pub fn from_polygon(poly: &ConvexPolygon, label: Label) -> Self {
        let v = poly.vertices();
        let pieces = (0..v.len())
            .map(|k| {
                BoundaryPiece::new(
                    Curve::Segment(Segment::new(v[k], v[(k + 1) % v.len()])),
                    label,
                )
            })
            .collect();
        Self { loops: vec![pieces] }
    }

    pub fn is_empty(&self) -> bool {
        self.loops.iter().all(|l| l.is_empty())
    }

    pub fn pieces(&self) -> impl Iterator<Item = &BoundaryPiece> + '_ {
        self.loops.iter().flatten()
    }

    pub fn piece_count(&self) -> usize {
        self.loops.iter().map(Vec::len).sum()
    }

    pub fn bbox(&self) -> BBox {
        self.pieces()
            .fold(BBox::empty(), |b, p| b.union(&p.curve.bbox()))
    }

    /// Area from `½∮(x dy − y dx)` in closed form per piece; holes subtract.
    pub fn area(&self) -> f64 {
        self.pieces().map(|p| p.curve.signed_area_term()).sum()
    }

    pub fn loop_signed_area(&self, idx: usize) -> f64 {
        self.loops[idx].iter().map(|p| p.curve.signed_area_term()).sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.pieces().map(|p| p.curve.length()).sum()
    }

    /// Total boundary length per label class, in the order
    /// own circle, world boundary, dominance, tie bisector.
    pub fn length_by_label_class(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for p in self.pieces() {
            out[p.label.class_index()] += p.curve.length();
        }
        out
    }

    pub fn winding_number(&self, p: Point2) -> i32 {
        let total: f64 = self.pieces().map(|piece| piece.curve.winding_angle(p)).sum();
        (total / (2.0 * PI)).round() as i32
    }

    /// Membership test for points off the boundary.
    pub fn contains(&self, p: Point2) -> bool {
        if self.is_empty() {
            return false;
        }
        let b = self.bbox();
        if p.x < b.min.x || p.x > b.max.x || p.y < b.min.y || p.y > b.max.y {
            return false;
        }
        self.winding_number(p) > 0
    }

    /// Largest distance between the end of a piece and the start of the
    /// next piece in its loop (closing the loop included).
    pub fn max_chain_gap(&self) -> f64 {
        self.loops
            .iter()
            .filter(|l| !l.is_empty())
            .flat_map(|l| {
                (0..l.len()).map(move |k| l[k].curve.end().distance(l[(k + 1) % l.len()].curve.start()))
            })
            .fold(0.0, f64::max)
    }

    pub fn relabeled(&self, label: Label) -> Self {
        Self {
            loops: self
                .loops
                .iter()
                .map(|l| l.iter().map(|p| BoundaryPiece::new(p.curve, label)).collect())
                .collect(),
        }
    }
}
