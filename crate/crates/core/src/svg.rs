//! SVG snapshots of the polygon, the sensing circles and the labeled cell
//! boundaries.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::geom::{Curve, Label};
use crate::partition::{CellSet, SwarmState};

fn label_class(label: &Label) -> (&'static str, Option<u32>) {
    match label {
        Label::OwnSensingCircle => ("own-circle", None),
        Label::WorldBoundary => ("world-boundary", None),
        Label::DominanceVs(j) => ("dominance", Some(j.0)),
        Label::TieBisectorVs(j) => ("tie-bisector", Some(j.0)),
    }
}

/// Path data for one curve, starting with a move to its start point.
fn curve_path(c: &Curve, out: &mut String) {
    let s = c.start();
    let _ = write!(out, "M {:.6} {:.6}", s.x, s.y);
    match c {
        Curve::Segment(seg) => {
            let _ = write!(out, " L {:.6} {:.6}", seg.b.x, seg.b.y);
        }
        Curve::Arc(a) => {
            let sweep_flag = u8::from(a.sweep() > 0.0);
            // a single elliptical-arc command cannot close a full circle
            let pieces = if a.extent() > PI { 2 } else { 1 };
            for k in 1..=pieces {
                let p = c.point_at(k as f64 / pieces as f64);
                let _ = write!(
                    out,
                    " A {r:.6} {r:.6} 0 0 {sweep_flag} {:.6} {:.6}",
                    p.x,
                    p.y,
                    r = a.radius
                );
            }
        }
    }
}

/// Renders one snapshot. Every boundary piece of every nonempty cell
/// becomes its own `<path class="piece ...">`.
pub fn render_snapshot(s: &SwarmState, cells: &CellSet, title: &str) -> String {
    let mut bb = s.omega.bbox();
    for i in 0..s.len() {
        let d = s.sensing_disk(i);
        let mut c = d.center;
        c.x -= d.radius;
        c.y -= d.radius;
        bb.include(c);
        c.x += 2.0 * d.radius;
        c.y += 2.0 * d.radius;
        bb.include(c);
    }
    let pad = 0.05 * bb.width().max(bb.height()).max(1e-3);
    let (x0, y0) = (bb.min.x - pad, bb.min.y - pad);
    let (w, h) = (bb.width() + 2.0 * pad, bb.height() + 2.0 * pad);
    let stroke = 0.004 * w.max(h);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.6} {h:.6}" width="800" height="{:.0}">"#,
        800.0 * h / w
    );
    let _ = writeln!(out, "<title>{title}</title>");
    let _ = writeln!(
        out,
        "<style>.omega{{fill:#f4f4f4;stroke:#333}} .sensing-circle{{fill:none;stroke:#999;stroke-dasharray:{d:.5}}} \
         .cell{{fill:#7fb3d5;fill-opacity:0.35;stroke:none}} .piece{{fill:none}} .own-circle{{stroke:#1f618d}} \
         .world-boundary{{stroke:#333}} .dominance{{stroke:#c0392b}} .tie-bisector{{stroke:#8e44ad}} \
         .node{{fill:#1f618d}}</style>",
        d = 3.0 * stroke
    );
    let _ = writeln!(
        out,
        r#"<g transform="translate({:.6} {:.6}) scale(1 -1)" stroke-width="{stroke:.6}">"#,
        -x0,
        y0 + h
    );

    let mut poly = String::new();
    for (k, v) in s.omega.vertices().iter().enumerate() {
        let _ = write!(poly, "{}{:.6} {:.6} ", if k == 0 { "M " } else { "L " }, v.x, v.y);
    }
    let _ = writeln!(out, r#"<path class="omega" d="{poly}Z"/>"#);

    for (cell, node) in cells.cells.iter().zip(&s.nodes) {
        if cell.is_empty() {
            continue;
        }
        let mut d = String::new();
        for lp in &cell.region.loops {
            for (k, piece) in lp.iter().enumerate() {
                let mut seg = String::new();
                curve_path(&piece.curve, &mut seg);
                if k > 0 {
                    // continue the loop instead of starting a new subpath
                    seg = seg.replacen('M', "L", 1);
                }
                d.push_str(&seg);
                d.push(' ');
            }
            d.push_str("Z ");
        }
        let _ = writeln!(
            out,
            r#"<path class="cell" data-owner="{}" fill-rule="nonzero" d="{}"/>"#,
            node.id,
            d.trim_end()
        );
    }

    for i in 0..s.len() {
        let d = s.sensing_disk(i);
        let _ = writeln!(
            out,
            r#"<circle class="sensing-circle" data-node="{}" cx="{:.6}" cy="{:.6}" r="{:.6}"/>"#,
            s.nodes[i].id, d.center.x, d.center.y, d.radius
        );
    }

    for (cell, node) in cells.cells.iter().zip(&s.nodes) {
        for piece in cell.region.pieces() {
            let (class, vs) = label_class(&piece.label);
            let mut d = String::new();
            curve_path(&piece.curve, &mut d);
            let vs = vs.map(|j| format!(r#" data-vs="{j}""#)).unwrap_or_default();
            let _ = writeln!(
                out,
                r#"<path class="piece {class}" data-owner="{}"{vs} d="{d}"/>"#,
                node.id
            );
        }
    }

    for n in &s.nodes {
        let _ = writeln!(
            out,
            r#"<circle class="node" cx="{:.6}" cy="{:.6}" r="{:.6}"/>"#,
            n.q.x,
            n.q.y,
            2.0 * stroke
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{ConvexPolygon, Point2};
    use crate::partition::{compute_all_cells, NodeState};
    use crate::quality::{QualityModel, QualityVariant};

    #[test]
    fn one_circle_per_node_and_one_path_per_piece() {
        let m = QualityModel::new(20f64.to_radians(), 0.3, 2.3, QualityVariant::Uniform).unwrap();
        let omega = ConvexPolygon::rectangle(Point2::ZERO, Point2::new(2.0, 2.0)).unwrap();
        let s = SwarmState::new(
            vec![
                NodeState::new(0, 0.5, 0.5, 0.8),
                NodeState::new(1, 0.8, 0.6, 1.0),
                NodeState::new(2, 1.9, 1.9, 0.6),
            ],
            m,
            omega,
        )
        .unwrap();
        let cells = compute_all_cells(&s);
        let svg = render_snapshot(&s, &cells, "t");
        assert_eq!(svg.matches(r#"class="sensing-circle""#).count(), 3);
        let pieces: usize = cells.cells.iter().map(|c| c.region.piece_count()).sum();
        assert_eq!(svg.matches(r#"class="piece "#).count(), pieces);
        assert!(svg.contains("world-boundary") && svg.contains("dominance"));
    }
}
