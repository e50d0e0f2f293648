#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use uavcov::geom::{ConvexPolygon, Point2};
use uavcov::partition::{compute_all_cells, NodeState, SwarmState};
use uavcov::quality::{QualityModel, QualityVariant};

pub fn model(variant: QualityVariant) -> QualityModel {
    QualityModel::new(20f64.to_radians(), 0.3, 2.3, variant).unwrap()
}

pub fn square(half: f64) -> ConvexPolygon {
    ConvexPolygon::rectangle(Point2::new(-half, -half), Point2::new(half, half)).unwrap()
}

/// Clustered nodes with distinct altitudes, no near-tangent circles and
/// no empty cells.
pub fn random_cluster(
    rng: &mut ChaCha8Rng,
    n: usize,
    variant: QualityVariant,
    omega: &ConvexPolygon,
) -> SwarmState {
    let m = model(variant);
    loop {
        let nodes: Vec<NodeState> = (0..n)
            .map(|k| {
                NodeState::new(
                    k as u32,
                    rng.gen_range(-0.35..0.35),
                    rng.gen_range(-0.35..0.35),
                    rng.gen_range(0.5..1.6),
                )
            })
            .collect();
        let Ok(s) = SwarmState::new(nodes, m, omega.clone()) else {
            continue;
        };
        if non_degenerate(&s) {
            return s;
        }
    }
}

pub fn non_degenerate(s: &SwarmState) -> bool {
    let gap = 0.02;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let (a, b) = (&s.nodes[i], &s.nodes[j]);
            if (a.z - b.z).abs() < 0.05 {
                return false;
            }
            let (di, dj) = (s.sensing_disk(i), s.sensing_disk(j));
            let d = di.center.distance(dj.center);
            if (d - (di.radius + dj.radius)).abs() < gap
                || (d - (di.radius - dj.radius).abs()).abs() < gap
                || d < gap
            {
                return false;
            }
        }
    }
    let cells = compute_all_cells(s);
    cells.cells.iter().all(|c| c.area() > 1e-3)
}

/// Area of the intersection of two disks, in closed form.
pub fn lens_area(c1: Point2, r1: f64, c2: Point2, r2: f64) -> f64 {
    let d = c1.distance(c2);
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return std::f64::consts::PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.max(0.0).sqrt()
}

/// Area of a union of disks from the uncovered arcs of each circle,
/// `½∮(x dy − y dx)`. Coincident circles count once.
pub fn union_area(disks: &[(Point2, f64)]) -> f64 {
    use std::f64::consts::TAU;
    let mut total = 0.0;
    for (i, &(c, r)) in disks.iter().enumerate() {
        let swallowed = disks.iter().enumerate().any(|(j, &(cj, rj))| {
            j != i && {
                let d = c.distance(cj);
                d + r < rj || (d + r <= rj + 1e-15 && (rj > r || j < i))
            }
        });
        if swallowed {
            continue;
        }
        let mut cuts = vec![0.0, TAU];
        for (j, &(cj, rj)) in disks.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = c.distance(cj);
            if d >= r + rj || d <= (r - rj).abs() {
                continue;
            }
            let base = (cj.y - c.y).atan2(cj.x - c.x);
            let w = ((d * d + r * r - rj * rj) / (2.0 * d * r)).clamp(-1.0, 1.0).acos();
            cuts.push((base + w).rem_euclid(TAU));
            cuts.push((base - w).rem_euclid(TAU));
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 < 1e-15 {
                continue;
            }
            let tm = 0.5 * (t0 + t1);
            let mid = Point2::new(c.x + r * tm.cos(), c.y + r * tm.sin());
            let covered = disks
                .iter()
                .enumerate()
                .any(|(j, &(cj, rj))| j != i && mid.distance(cj) < rj);
            if !covered {
                total += 0.5
                    * (r * r * (t1 - t0)
                        + r * (c.x * (t1.sin() - t0.sin()) - c.y * (t1.cos() - t0.cos())));
            }
        }
    }
    total
}

/// Monte-Carlo estimate of the area of `{p ∈ box : inside(p)}` with its
/// standard error.
pub fn mc_area(
    rng: &mut ChaCha8Rng,
    lo: Point2,
    hi: Point2,
    samples: usize,
    inside: impl Fn(Point2) -> bool,
) -> (f64, f64) {
    let box_area = (hi.x - lo.x) * (hi.y - lo.y);
    let hits = (0..samples)
        .filter(|_| {
            inside(Point2::new(
                rng.gen_range(lo.x..hi.x),
                rng.gen_range(lo.y..hi.y),
            ))
        })
        .count();
    let p = hits as f64 / samples as f64;
    (
        box_area * p,
        box_area * (p * (1.0 - p) / samples as f64).sqrt(),
    )
}
