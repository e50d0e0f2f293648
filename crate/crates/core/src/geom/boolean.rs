//! Boolean operations on arc-bounded regions.
//!
//! Both operands are cut at every mutual crossing, each sub-piece is
//! classified by its midpoint against the other operand, the surviving
//! pieces are kept (reversed where the operation requires it) and then
//! re-chained into closed loops.

use log::debug;
use serde::{Deserialize, Serialize};

use super::curve::{curve_intersections, Curve, Disk};
use super::point::{Point2, Vec2};
use super::polygon::ConvexPolygon;
use super::region::{ArcRegion, BoundaryPiece, Label};
use super::EPS;

/// Sub-pieces shorter than this are dropped and nearby cut points merged.
const MIN_PIECE: f64 = 1e-10;
/// Endpoint distance accepted when re-chaining loops.
const CHAIN_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoolOp {
    Intersect,
    Subtract,
}

/// Closed half-plane `{x : (x − point)·normal ≤ 0}`; `normal` points out of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub point: Point2,
    pub normal: Vec2,
}

impl HalfPlane {
    pub fn new(point: Point2, normal: Vec2) -> Self {
        Self {
            point,
            normal: normal.normalized(),
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        (p - self.point).dot(self.normal) <= 0.0
    }

    /// Rectangle agreeing with the half-plane on a disk of radius `reach`
    /// around `around`.
    fn as_region(&self, around: Point2, reach: f64, label: Label) -> ArcRegion {
        let n = self.normal;
        let d = n.perp();
        let foot = around - n * (around - self.point).dot(n);
        let l = 2.0 * reach + (around - self.point).dot(n).abs() + 1.0;
        let corners = [
            foot - d * l,
            foot + d * l,
            foot + d * l - n * (2.0 * l),
            foot - d * l - n * (2.0 * l),
        ];
        let pieces = (0..4)
            .map(|k| {
                BoundaryPiece::new(
                    Curve::Segment(super::curve::Segment::new(corners[k], corners[(k + 1) % 4])),
                    label,
                )
            })
            .collect();
        ArcRegion { loops: vec![pieces] }
    }
}

/// Second operand of [`region_boolean`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    Disk(Disk),
    HalfPlane(HalfPlane),
}

/// `a ∩ b` or `a \ b` for a disk or half-plane `b`; boundary introduced by
/// `b` carries `label`.
pub fn region_boolean(op: BoolOp, a: &ArcRegion, b: Primitive, label: Label) -> ArcRegion {
    let b_region = match b {
        Primitive::Disk(d) => ArcRegion::from_disk(&d, label),
        Primitive::HalfPlane(h) => {
            let bb = a.bbox();
            if bb.is_empty() {
                return ArcRegion::empty();
            }
            let center = bb.min.lerp(bb.max, 0.5);
            let reach = 0.5 * bb.min.distance(bb.max);
            h.as_region(center, reach, label)
        }
    };
    boolean(op, a, &b_region)
}

/// The disk clipped to the polygon; arcs are labeled
/// [`Label::OwnSensingCircle`] and polygon edges [`Label::WorldBoundary`].
pub fn clip_disk_to_polygon(d: &Disk, omega: &ConvexPolygon) -> ArcRegion {
    let disk = ArcRegion::from_disk(d, Label::OwnSensingCircle);
    if omega.contains(d.center) && omega.signed_distance(d.center) >= d.radius {
        return disk;
    }
    if omega.vertices().iter().all(|v| d.contains(*v)) {
        return ArcRegion::from_polygon(omega, Label::WorldBoundary);
    }
    boolean(
        BoolOp::Intersect,
        &disk,
        &ArcRegion::from_polygon(omega, Label::WorldBoundary),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Inside,
    Outside,
    OnSame,
    OnOpposite,
}

/// General boolean of two arc regions.
pub fn boolean(op: BoolOp, a: &ArcRegion, b: &ArcRegion) -> ArcRegion {
    if a.is_empty() {
        return ArcRegion::empty();
    }
    if b.is_empty() || !a.bbox().intersects(&b.bbox(), 4.0 * EPS) {
        return match op {
            BoolOp::Intersect => ArcRegion::empty(),
            BoolOp::Subtract => a.clone(),
        };
    }
    let pa: Vec<BoundaryPiece> = a.pieces().copied().collect();
    let pb: Vec<BoundaryPiece> = b.pieces().copied().collect();
    let (cuts_a, cuts_b) = cut_points(&pa, &pb);

    let sub_a: Vec<BoundaryPiece> = pa
        .iter()
        .zip(&cuts_a)
        .flat_map(|(p, c)| split_piece(p, c))
        .collect();
    let sub_b: Vec<BoundaryPiece> = pb
        .iter()
        .zip(&cuts_b)
        .flat_map(|(p, c)| split_piece(p, c))
        .collect();

    let mut kept = Vec::with_capacity(sub_a.len() + sub_b.len());
    for p in &sub_a {
        let keep = match (op, classify(p, &pb)) {
            (BoolOp::Intersect, Class::Inside | Class::OnSame) => true,
            (BoolOp::Subtract, Class::Outside | Class::OnOpposite) => true,
            _ => false,
        };
        if keep {
            kept.push(*p);
        }
    }
    for p in &sub_b {
        if classify(p, &pa) == Class::Inside {
            kept.push(match op {
                BoolOp::Intersect => *p,
                BoolOp::Subtract => BoundaryPiece::new(p.curve.reversed(), p.label),
            });
        }
    }
    ArcRegion {
        loops: chain_loops(kept),
    }
}

type Cuts = Vec<Vec<(f64, Point2)>>;

fn cut_points(pa: &[BoundaryPiece], pb: &[BoundaryPiece]) -> (Cuts, Cuts) {
    let mut cuts_a: Cuts = vec![Vec::new(); pa.len()];
    let mut cuts_b: Cuts = vec![Vec::new(); pb.len()];
    let bba: Vec<_> = pa.iter().map(|p| p.curve.bbox()).collect();
    let bbb: Vec<_> = pb.iter().map(|p| p.curve.bbox()).collect();
    for (i, a) in pa.iter().enumerate() {
        for (j, b) in pb.iter().enumerate() {
            if !bba[i].intersects(&bbb[j], 4.0 * EPS) {
                continue;
            }
            for (ta, tb, p) in curve_intersections(&a.curve, &b.curve) {
                cuts_a[i].push((ta, p));
                cuts_b[j].push((tb, p));
            }
            // Endpoints resting on the other curve: tangencies, T-junctions
            // and overlapping stretches.
            for e in [b.curve.start(), b.curve.end()] {
                if let Some(t) = a.curve.param_of(e, EPS) {
                    cuts_a[i].push((t, e));
                }
            }
            for e in [a.curve.start(), a.curve.end()] {
                if let Some(t) = b.curve.param_of(e, EPS) {
                    cuts_b[j].push((t, e));
                }
            }
        }
    }
    (cuts_a, cuts_b)
}

fn split_piece(piece: &BoundaryPiece, cuts: &[(f64, Point2)]) -> Vec<BoundaryPiece> {
    let len = piece.curve.length();
    let full = matches!(piece.curve, Curve::Arc(a) if a.is_full());
    let mut ts: Vec<f64> = cuts.iter().map(|c| c.0).collect();
    ts.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(ts.len());
    for t in ts {
        if !full && (t * len <= MIN_PIECE || (1.0 - t) * len <= MIN_PIECE) {
            continue;
        }
        if merged.last().is_some_and(|&last| (t - last) * len <= MIN_PIECE) {
            continue;
        }
        merged.push(t);
    }
    if full && merged.len() > 1 {
        let first = merged[0];
        if (first + 1.0 - merged[merged.len() - 1]) * len <= MIN_PIECE {
            merged.pop();
        }
    }
    let bounds: Vec<(f64, f64)> = if full {
        if merged.is_empty() {
            return vec![*piece];
        }
        let k = merged.len();
        (0..k)
            .map(|i| {
                let t0 = merged[i];
                let t1 = if i + 1 < k { merged[i + 1] } else { merged[0] + 1.0 };
                (t0, t1)
            })
            .collect()
    } else {
        let mut edges = Vec::with_capacity(merged.len() + 2);
        edges.push(0.0);
        edges.extend(merged);
        edges.push(1.0);
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    };
    bounds
        .into_iter()
        .filter(|(t0, t1)| (t1 - t0) * len > MIN_PIECE)
        .map(|(t0, t1)| BoundaryPiece::new(piece.curve.sub(t0, t1), piece.label))
        .collect()
}

fn classify(piece: &BoundaryPiece, other: &[BoundaryPiece]) -> Class {
    let m = piece.curve.point_at(0.5);
    let tau = piece.curve.tangent_at(0.5);
    for q in other {
        if let Some(t) = q.curve.param_of(m, EPS) {
            let tau_q = q.curve.tangent_at(t);
            if tau.cross(tau_q).abs() < 1e-6 {
                return if tau.dot(tau_q) > 0.0 {
                    Class::OnSame
                } else {
                    Class::OnOpposite
                };
            }
        }
    }
    let total: f64 = other.iter().map(|q| q.curve.winding_angle(m)).sum();
    if total > std::f64::consts::PI {
        Class::Inside
    } else {
        Class::Outside
    }
}

fn turn_angle(incoming: Vec2, outgoing: Vec2) -> f64 {
    let a = incoming.cross(outgoing).atan2(incoming.dot(outgoing));
    // A reversal is the least preferred continuation.
    if a.abs() > std::f64::consts::PI - 1e-9 {
        -std::f64::consts::PI
    } else {
        a
    }
}

/// Greedy re-chaining; at a vertex with several outgoing pieces the
/// leftmost turn is taken, which keeps touching components apart.
fn chain_loops(pieces: Vec<BoundaryPiece>) -> Vec<Vec<BoundaryPiece>> {
    let mut remaining: Vec<Option<BoundaryPiece>> = pieces.into_iter().map(Some).collect();
    let starts: Vec<Point2> = remaining
        .iter()
        .map(|p| p.as_ref().map(|p| p.curve.start()).unwrap_or_default())
        .collect();
    let mut loops = Vec::new();
    let mut cursor = 0;
    while cursor < remaining.len() {
        let Some(first) = remaining[cursor].take() else {
            cursor += 1;
            continue;
        };
        let loop_start = first.curve.start();
        let mut lp = vec![first];
        loop {
            let last = lp[lp.len() - 1];
            let end = last.curve.end();
            if end.distance(loop_start) <= CHAIN_TOL {
                break;
            }
            let incoming = last.curve.tangent_at(1.0);
            let next = remaining
                .iter()
                .enumerate()
                .filter_map(|(k, p)| p.as_ref().map(|p| (k, p)))
                .filter(|(k, _)| starts[*k].distance(end) <= CHAIN_TOL)
                .max_by(|(_, x), (_, y)| {
                    turn_angle(incoming, x.curve.tangent_at(0.0))
                        .total_cmp(&turn_angle(incoming, y.curve.tangent_at(0.0)))
                })
                .map(|(k, _)| k);
            match next {
                Some(k) => lp.push(remaining[k].take().expect("candidate present")),
                None => {
                    debug!(
                        "open chain: gap {:.3e} at ({}, {})",
                        end.distance(loop_start),
                        end.x,
                        end.y
                    );
                    break;
                }
            }
        }
        loops.push(lp);
    }
    loops
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn disk(x: f64, y: f64, r: f64) -> Disk {
        Disk::new(Point2::new(x, y), r).unwrap()
    }

    fn region(d: Disk) -> ArcRegion {
        ArcRegion::from_disk(&d, Label::OwnSensingCircle)
    }

    #[test]
    fn lens_area_matches_closed_form() {
        let lens = region_boolean(
            BoolOp::Intersect,
            &region(disk(0.0, 0.0, 1.0)),
            Primitive::Disk(disk(1.0, 0.0, 1.0)),
            Label::DominanceVs(super::super::region::NodeId(2)),
        );
        let exact = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert!((lens.area() - exact).abs() < 1e-12, "{}", lens.area());
        assert_eq!(lens.loops.len(), 1);
        assert_eq!(lens.piece_count(), 2);
        assert!(lens.max_chain_gap() < 1e-12);
    }

    #[test]
    fn disjoint_subtraction_is_identity() {
        let a = region(disk(0.0, 0.0, 1.0));
        let out = region_boolean(
            BoolOp::Subtract,
            &a,
            Primitive::Disk(disk(5.0, 0.0, 1.0)),
            Label::WorldBoundary,
        );
        assert_eq!(out, a);
    }

    #[test]
    fn contained_subtraction_leaves_a_hole() {
        let outer = region(disk(0.0, 0.0, 2.0));
        let ring = region_boolean(
            BoolOp::Subtract,
            &outer,
            Primitive::Disk(disk(0.3, 0.1, 0.5)),
            Label::WorldBoundary,
        );
        assert!((ring.area() - PI * (4.0 - 0.25)).abs() < 1e-12);
        assert_eq!(ring.loops.len(), 2);
        let signs: Vec<f64> = (0..2).map(|k| ring.loop_signed_area(k).signum()).collect();
        assert!(signs.contains(&1.0) && signs.contains(&-1.0));
        assert!(!ring.contains(Point2::new(0.3, 0.1)));
        assert!(ring.contains(Point2::new(-1.5, 0.0)));
    }

    #[test]
    fn half_plane_cut_of_disk() {
        let d = region(disk(0.0, 0.0, 1.0));
        let hp = HalfPlane::new(Point2::ZERO, Point2::new(1.0, 0.0));
        let half = region_boolean(BoolOp::Intersect, &d, Primitive::HalfPlane(hp), Label::WorldBoundary);
        assert!((half.area() - PI / 2.0).abs() < 1e-12);
        let lengths = half.length_by_label_class();
        assert!((lengths[0] - PI).abs() < 1e-12);
        assert!((lengths[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_disks_have_empty_intersection() {
        let out = region_boolean(
            BoolOp::Intersect,
            &region(disk(0.0, 0.0, 1.0)),
            Primitive::Disk(disk(2.0, 0.0, 1.0)),
            Label::WorldBoundary,
        );
        assert!(out.area().abs() < 1e-12);
    }

    #[test]
    fn internally_tangent_subtraction() {
        let out = region_boolean(
            BoolOp::Subtract,
            &region(disk(0.0, 0.0, 1.0)),
            Primitive::Disk(disk(0.5, 0.0, 0.5)),
            Label::WorldBoundary,
        );
        assert!((out.area() - 0.75 * PI).abs() < 1e-12);
        assert!(out.max_chain_gap() < 1e-9);
    }

    #[test]
    fn clip_cases() {
        let sq = ConvexPolygon::rectangle(Point2::new(0.0, 0.0), Point2::new(10.0, 10.0)).unwrap();
        let full = clip_disk_to_polygon(&disk(5.0, 5.0, 1.0), &sq);
        assert_eq!(full.piece_count(), 1);
        assert!((full.area() - PI).abs() < 1e-12);
        let half = clip_disk_to_polygon(&disk(5.0, 0.0, 1.0), &sq);
        assert!((half.area() - PI / 2.0).abs() < 1e-12);
        assert!(clip_disk_to_polygon(&disk(-5.0, 0.0, 1.0), &sq).is_empty());
        let corner = clip_disk_to_polygon(&disk(0.0, 0.0, 1.0), &sq);
        assert!((corner.area() - PI / 4.0).abs() < 1e-12);
    }
}
