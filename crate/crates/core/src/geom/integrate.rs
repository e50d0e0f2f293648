//! Line and area integrals over arc-bounded regions.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use super::curve::Curve;
use super::point::{BBox, Point2, Vec2};
use super::quadrature::GaussLegendre;
use super::region::{ArcRegion, BoundaryPiece, Label};
use crate::par::*;

/// Arcs are integrated in panels no wider than this angle.
const MAX_PANEL_ANGLE: f64 = PI / 4.0;

/// Values that can be integrated: scalars and planar vectors.
pub trait Quantity: Copy + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl Quantity for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Quantity for Point2 {
    fn zero() -> Self {
        Point2::ZERO
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Gauss–Legendre order per boundary panel.
    pub gl_order: usize,
    /// Cells per side of the bounding-box grid for area quadrature.
    pub grid_resolution: usize,
    /// Partial grid cells are split into `refine × refine` sub-cells.
    pub refine: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            gl_order: 16,
            grid_resolution: 200,
            refine: 8,
        }
    }
}

/// What the integrand sees at a boundary quadrature node.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySample<'a> {
    pub point: Point2,
    /// Outward unit normal of the region.
    pub normal: Vec2,
    /// Angle on the supporting circle for arcs.
    pub angle: Option<f64>,
    pub piece: &'a BoundaryPiece,
}

/// `∫ g ds` over one curve with panelled Gauss–Legendre.
pub fn curve_integral<T: Quantity>(
    curve: &Curve,
    rule: &GaussLegendre,
    mut g: impl FnMut(Point2, Vec2, Option<f64>) -> T,
) -> T {
    match curve {
        Curve::Segment(s) => {
            let len = s.length();
            let normal = curve.outward_normal_at(0.5);
            let half = 0.5 * len;
            let mut acc = T::zero();
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let t = 0.5 * (1.0 + x);
                acc = acc + g(s.a.lerp(s.b, t), normal, None) * (w * half);
            }
            acc
        }
        Curve::Arc(a) => {
            let panels = (a.extent() / MAX_PANEL_ANGLE).ceil().max(1.0) as usize;
            let dk = a.sweep() / panels as f64;
            let sign = a.sweep().signum();
            let mut acc = T::zero();
            for p in 0..panels {
                let k0 = a.k_start + p as f64 * dk;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let k = k0 + 0.5 * dk * (1.0 + x);
                    let radial = Point2::from_angle(k);
                    let point = a.center + radial * a.radius;
                    acc = acc + g(point, radial * sign, Some(k)) * (w * 0.5 * dk.abs() * a.radius);
                }
            }
            acc
        }
    }
}

/// `∫ g ds` over the boundary pieces accepted by `filter`.
pub fn boundary_line_integral<T: Quantity>(
    region: &ArcRegion,
    rule: &GaussLegendre,
    mut filter: impl FnMut(&Label) -> bool,
    mut integrand: impl FnMut(&BoundarySample<'_>) -> T,
) -> T {
    let mut acc = T::zero();
    for piece in region.pieces().filter(|p| filter(&p.label)) {
        acc = acc
            + curve_integral(&piece.curve, rule, |point, normal, angle| {
                integrand(&BoundarySample {
                    point,
                    normal,
                    angle,
                    piece,
                })
            });
    }
    acc
}

/// Area moments about a reference point `c`:
/// `∫ 1`, `∫ (q − c)` and `∫ |q − c|²` over the region.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionMoments {
    pub area: f64,
    pub first: Vec2,
    pub second: f64,
}

/// Moments via the divergence theorem on each boundary piece.
pub fn region_moments(region: &ArcRegion, about: Point2, rule: &GaussLegendre) -> RegionMoments {
    let mut first = Point2::ZERO;
    let mut second = 0.0;
    for piece in region.pieces() {
        // ∫u dA = ∮ u²/2 dv,  ∫v dA = −∮ v²/2 du,  ∫(u²+v²) dA = ∮ (u³ dv − v³ du)/3,
        // written as ∮ F·n ds with n ds = (dv, −du).
        let (f, s) = curve_integral(&piece.curve, rule, |p, n, _| {
            let d = p - about;
            Pair(
                Point2::new(0.5 * d.x * d.x * n.x, 0.5 * d.y * d.y * n.y),
                (d.x * d.x * d.x * n.x + d.y * d.y * d.y * n.y) / 3.0,
            )
        })
        .into_pair();
        first += f;
        second += s;
    }
    RegionMoments {
        area: region.area(),
        first,
        second,
    }
}

/// Point plus scalar, integrated together.
#[derive(Debug, Clone, Copy)]
struct Pair(Point2, f64);

impl Pair {
    fn into_pair(self) -> (Point2, f64) {
        (self.0, self.1)
    }
}

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

impl Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, s: f64) -> Pair {
        Pair(self.0 * s, self.1 * s)
    }
}

impl Quantity for Pair {
    fn zero() -> Self {
        Pair(Point2::ZERO, 0.0)
    }
}

/// Result of a grid quadrature with a worst-case error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEstimate<T> {
    pub value: T,
    /// Bound on the error from cells crossed by a discontinuity, assuming
    /// the integrand magnitude never exceeds `jump` (see [`grid_integrate`]).
    pub discontinuity_bound: f64,
    pub sub_cell_size: f64,
}

/// Deterministic grid quadrature over `bbox`.
///
/// Cells touched by any curve in `edges` are split into `refine × refine`
/// sub-cells; every (sub-)cell is evaluated at its center, counted only if
/// `inside` holds there. Discontinuities of the integrand must lie on
/// `edges`. The bound `discontinuity_bound` is `4·jump·(L·h + m·h²)` for
/// total edge length `L`, `m` edges and sub-cell size `h`: a curve of length
/// `L` meets at most `4(L/h + 1)` sub-cells.
pub fn grid_integrate<T: Quantity>(
    bbox: BBox,
    resolution: usize,
    refine: usize,
    edges: &[Curve],
    jump: f64,
    inside: impl Fn(Point2) -> bool + Sync,
    integrand: impl Fn(Point2) -> T + Sync,
) -> GridEstimate<T> {
    if bbox.is_empty() || resolution == 0 {
        return GridEstimate {
            value: T::zero(),
            discontinuity_bound: 0.0,
            sub_cell_size: 0.0,
        };
    }
    let n = resolution;
    let refine = refine.max(1);
    let side = bbox.width().max(bbox.height()).max(1e-12) * (1.0 + 1e-9);
    let h = side / n as f64;
    let origin = bbox.min;

    // Mark cells crossed by an edge by sampling along it at h/4 spacing.
    let mut partial = vec![false; n * n];
    for e in edges {
        let steps = ((e.length() / (0.25 * h)).ceil() as usize).max(1);
        for k in 0..=steps {
            let p = e.point_at(k as f64 / steps as f64);
            let ix = ((p.x - origin.x) / h).floor();
            let iy = ((p.y - origin.y) / h).floor();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let (cx, cy) = (ix as i64 + dx, iy as i64 + dy);
                    if cx >= 0 && cy >= 0 && (cx as usize) < n && (cy as usize) < n {
                        // Only neighbors that the sample point is within h/4 of.
                        let lo = Point2::new(origin.x + cx as f64 * h, origin.y + cy as f64 * h);
                        let margin = 0.25 * h;
                        if p.x >= lo.x - margin
                            && p.x <= lo.x + h + margin
                            && p.y >= lo.y - margin
                            && p.y <= lo.y + h + margin
                        {
                            partial[cy as usize * n + cx as usize] = true;
                        }
                    }
                }
            }
        }
    }

    let hs = h / refine as f64;
    let row_sums: Vec<T> = (0..n)
        .into_par_iter()
        .map(|iy| {
            let mut acc = T::zero();
            for ix in 0..n {
                let lo = Point2::new(origin.x + ix as f64 * h, origin.y + iy as f64 * h);
                if partial[iy * n + ix] {
                    for sy in 0..refine {
                        for sx in 0..refine {
                            let p = Point2::new(
                                lo.x + (sx as f64 + 0.5) * hs,
                                lo.y + (sy as f64 + 0.5) * hs,
                            );
                            if inside(p) {
                                acc = acc + integrand(p) * (hs * hs);
                            }
                        }
                    }
                } else {
                    let p = Point2::new(lo.x + 0.5 * h, lo.y + 0.5 * h);
                    if inside(p) {
                        acc = acc + integrand(p) * (h * h);
                    }
                }
            }
            acc
        })
        .collect();
    let value = row_sums.into_iter().fold(T::zero(), |a, b| a + b);
    let total_len: f64 = edges.iter().map(Curve::length).sum();
    GridEstimate {
        value,
        discontinuity_bound: 4.0 * jump * (total_len * hs + edges.len() as f64 * hs * hs),
        sub_cell_size: hs,
    }
}

/// Grid quadrature of `integrand` over `region` at the given resolution;
/// cells crossing the boundary are refined once.
pub fn region_area_integral<T: Quantity>(
    region: &ArcRegion,
    integrand: impl Fn(Point2) -> T + Sync,
    resolution: usize,
) -> T {
    region_area_integral_with(region, integrand, resolution, QuadratureConfig::default().refine, 1.0)
        .value
}

/// As [`region_area_integral`], with explicit refinement and the
/// integrand magnitude bound used for the error estimate.
pub fn region_area_integral_with<T: Quantity>(
    region: &ArcRegion,
    integrand: impl Fn(Point2) -> T + Sync,
    resolution: usize,
    refine: usize,
    magnitude: f64,
) -> GridEstimate<T> {
    let edges: Vec<Curve> = region.pieces().map(|p| p.curve).collect();
    grid_integrate(
        region.bbox(),
        resolution,
        refine,
        &edges,
        magnitude,
        |p| region.contains(p),
        integrand,
    )
}
