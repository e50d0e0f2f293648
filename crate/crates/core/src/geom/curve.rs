use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::point::{BBox, Point2, Vec2};
use super::{GeomError, EPS};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(k: f64) -> f64 {
    let w = (k + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Closed disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point2, radius: f64) -> Result<Self, GeomError> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(GeomError::InvalidDisk { radius });
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: Point2) -> bool {
        (p - self.center).norm_sq() <= self.radius * self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn boundary(&self, orientation: Orientation) -> Arc {
        Arc::full_circle(self.center, self.radius, orientation)
    }
}

/// Returns the intersection points of the two boundary circles.
///
/// Tangent circles (within [`EPS`]) give a single point. Two points are
/// ordered so that the first lies to the left of the line `d1.center -> d2.center`.
pub fn circle_circle_intersection(d1: &Disk, d2: &Disk) -> Result<Vec<Point2>, GeomError> {
    circle_points(d1.center, d1.radius, d2.center, d2.radius)
}

fn circle_points(c1: Point2, r1: f64, c2: Point2, r2: f64) -> Result<Vec<Point2>, GeomError> {
    let delta = c2 - c1;
    let d = delta.norm();
    if d <= EPS && (r1 - r2).abs() <= EPS {
        return Err(GeomError::DegenerateOverlap);
    }
    if d > r1 + r2 + EPS || d < (r1 - r2).abs() - EPS || d <= EPS {
        return Ok(Vec::new());
    }
    let u = delta * (1.0 / d);
    let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h_sq = r1 * r1 - a * a;
    let tangent = (d - (r1 + r2)).abs() <= EPS || (d - (r1 - r2).abs()).abs() <= EPS;
    let base = c1 + u * a;
    if tangent || h_sq <= 0.0 {
        return Ok(vec![base]);
    }
    let h = h_sq.sqrt();
    Ok(vec![base + u.perp() * h, base - u.perp() * h])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Ccw => 1.0,
            Orientation::Cw => -1.0,
        }
    }
}

/// Straight segment from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn direction(&self) -> Vec2 {
        self.b - self.a
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }
}

/// Circular arc `center + radius·(cos k, sin k)` for `k` running from
/// `k_start` through a signed angular `sweep`. Positive sweep is
/// counterclockwise; `|sweep| ∈ (0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center: Point2,
    pub radius: f64,
    /// Start angle in `(-π, π]`.
    pub k_start: f64,
    sweep: f64,
}

impl Arc {
    pub fn new(center: Point2, radius: f64, k_start: f64, sweep: f64) -> Self {
        debug_assert!(sweep != 0.0 && sweep.abs() <= TAU + 1e-12);
        Self {
            center,
            radius,
            k_start: wrap_angle(k_start),
            sweep: sweep.clamp(-TAU, TAU),
        }
    }

    /// Arc from `k_start` to `k_end` (both wrapped) in the given direction.
    /// Equal angles denote the full circle.
    pub fn from_angles(
        center: Point2,
        radius: f64,
        k_start: f64,
        k_end: f64,
        orientation: Orientation,
    ) -> Self {
        let raw = match orientation {
            Orientation::Ccw => k_end - k_start,
            Orientation::Cw => k_start - k_end,
        };
        let mut extent = raw.rem_euclid(TAU);
        if extent == 0.0 {
            extent = TAU;
        }
        Self::new(center, radius, k_start, orientation.sign() * extent)
    }

    pub fn full_circle(center: Point2, radius: f64, orientation: Orientation) -> Self {
        Self::new(center, radius, 0.0, orientation.sign() * TAU)
    }

    pub fn sweep(&self) -> f64 {
        self.sweep
    }

    pub fn extent(&self) -> f64 {
        self.sweep.abs()
    }

    pub fn k_end(&self) -> f64 {
        wrap_angle(self.k_start + self.sweep)
    }

    pub fn orientation(&self) -> Orientation {
        if self.sweep > 0.0 {
            Orientation::Ccw
        } else {
            Orientation::Cw
        }
    }

    pub fn is_full(&self) -> bool {
        self.extent() >= TAU - 1e-15
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        self.k_start + t * self.sweep
    }

    pub fn point_at_angle(&self, k: f64) -> Point2 {
        self.center + Point2::from_angle(k) * self.radius
    }

    pub fn length(&self) -> f64 {
        self.radius * self.extent()
    }

    /// Parameter in `[0, 1]` of a point assumed near the circle, if its
    /// angle falls within the arc (with [`EPS`] slack at both ends).
    pub fn param_of(&self, p: Point2) -> Option<f64> {
        let phi = (p - self.center).angle();
        let off = if self.sweep > 0.0 {
            (phi - self.k_start).rem_euclid(TAU)
        } else {
            (self.k_start - phi).rem_euclid(TAU)
        };
        let ext = self.extent();
        let slack = EPS / self.radius;
        if off <= ext + slack {
            Some((off / ext).min(1.0))
        } else if off >= TAU - slack {
            Some(0.0)
        } else {
            None
        }
    }
}

/// One boundary primitive: a straight segment or a circular arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Curve {
    Segment(Segment),
    Arc(Arc),
}

impl Curve {
    pub fn point_at(&self, t: f64) -> Point2 {
        match self {
            Curve::Segment(s) => s.a.lerp(s.b, t),
            Curve::Arc(a) => a.point_at_angle(a.angle_at(t)),
        }
    }

    pub fn start(&self) -> Point2 {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point2 {
        match self {
            Curve::Segment(s) => s.b,
            Curve::Arc(_) => self.point_at(1.0),
        }
    }

    /// Unit tangent in the direction of travel.
    pub fn tangent_at(&self, t: f64) -> Vec2 {
        match self {
            Curve::Segment(s) => s.direction().normalized(),
            Curve::Arc(a) => Point2::from_angle(a.angle_at(t)).perp() * a.sweep.signum(),
        }
    }

    /// Unit normal pointing to the right of the direction of travel; this is
    /// the outward normal when the region lies on the left.
    pub fn outward_normal_at(&self, t: f64) -> Vec2 {
        let tg = self.tangent_at(t);
        Point2::new(tg.y, -tg.x)
    }

    pub fn length(&self) -> f64 {
        match self {
            Curve::Segment(s) => s.length(),
            Curve::Arc(a) => a.length(),
        }
    }

    pub fn reversed(&self) -> Curve {
        match self {
            Curve::Segment(s) => Curve::Segment(Segment::new(s.b, s.a)),
            Curve::Arc(a) => Curve::Arc(Arc::new(a.center, a.radius, a.k_start + a.sweep, -a.sweep)),
        }
    }

    /// Sub-curve between parameters `t0 < t1`.
    pub fn sub(&self, t0: f64, t1: f64) -> Curve {
        match self {
            Curve::Segment(s) => Curve::Segment(Segment::new(s.a.lerp(s.b, t0), s.a.lerp(s.b, t1))),
            Curve::Arc(a) => Curve::Arc(Arc::new(
                a.center,
                a.radius,
                a.angle_at(t0),
                (t1 - t0) * a.sweep,
            )),
        }
    }

    pub fn bbox(&self) -> BBox {
        let mut b = BBox::empty();
        match self {
            Curve::Segment(s) => {
                b.include(s.a);
                b.include(s.b);
            }
            Curve::Arc(a) => {
                b.include(self.start());
                b.include(self.end());
                for q in 0..4 {
                    let k = q as f64 * PI / 2.0;
                    let p = a.point_at_angle(k);
                    if a.param_of(p).is_some() {
                        b.include(p);
                    }
                }
            }
        }
        b
    }

    /// Parameter of a point lying on the curve within `tol`, if any.
    pub fn param_of(&self, p: Point2, tol: f64) -> Option<f64> {
        match self {
            Curve::Segment(s) => {
                let v = s.direction();
                let len_sq = v.norm_sq();
                if len_sq == 0.0 {
                    return None;
                }
                let t = (p - s.a).dot(v) / len_sq;
                let len = len_sq.sqrt();
                let slack = tol / len;
                if t < -slack || t > 1.0 + slack {
                    return None;
                }
                let foot = s.a + v * t.clamp(0.0, 1.0);
                (foot.distance(p) <= tol).then_some(t.clamp(0.0, 1.0))
            }
            Curve::Arc(a) => {
                if ((p - a.center).norm() - a.radius).abs() > tol {
                    return None;
                }
                a.param_of(p)
            }
        }
    }

    pub fn distance_to(&self, p: Point2) -> f64 {
        match self {
            Curve::Segment(s) => {
                let v = s.direction();
                let len_sq = v.norm_sq();
                let t = if len_sq > 0.0 {
                    ((p - s.a).dot(v) / len_sq).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (s.a + v * t).distance(p)
            }
            Curve::Arc(a) => {
                if a.param_of(p).is_some() {
                    ((p - a.center).norm() - a.radius).abs()
                } else {
                    self.start().distance(p).min(self.end().distance(p))
                }
            }
        }
    }

    /// Contribution of this piece to `½∮(x dy − y dx)`.
    pub fn signed_area_term(&self) -> f64 {
        match self {
            Curve::Segment(s) => 0.5 * s.a.cross(s.b),
            Curve::Arc(a) => {
                let (k0, k1) = (a.k_start, a.k_start + a.sweep);
                let c = a.center;
                let r = a.radius;
                0.5 * (r * c.x * (k1.sin() - k0.sin()) - r * c.y * (k1.cos() - k0.cos())
                    + r * r * a.sweep)
            }
        }
    }

    /// Signed angle swept by the curve as seen from `p` (which must not lie
    /// on the curve).
    pub fn winding_angle(&self, p: Point2) -> f64 {
        let chord = |a: Point2, b: Point2| {
            let (u, v) = (a - p, b - p);
            u.cross(v).atan2(u.dot(v))
        };
        match self {
            Curve::Segment(s) => chord(s.a, s.b),
            Curve::Arc(a) => {
                let inside_circle = (p - a.center).norm_sq() < a.radius * a.radius;
                if a.is_full() {
                    return if inside_circle { a.sweep.signum() * TAU } else { 0.0 };
                }
                let (s, e) = (self.start(), self.end());
                let base = chord(s, e);
                if !inside_circle {
                    return base;
                }
                // p inside the circle: it is enclosed by arc + closing chord
                // exactly when it lies on the arc's side of the chord.
                let mid = self.point_at(0.5);
                let d = e - s;
                let side_p = d.cross(p - s);
                let side_m = d.cross(mid - s);
                if side_p * side_m > 0.0 {
                    base + a.sweep.signum() * TAU
                } else {
                    base
                }
            }
        }
    }
}

/// Proper intersections of two curves: `(t_on_a, t_on_b, point)`.
/// Overlapping collinear or co-circular pieces report nothing here; callers
/// split those at each other's endpoints instead.
pub fn curve_intersections(a: &Curve, b: &Curve) -> Vec<(f64, f64, Point2)> {
    let pts: Vec<Point2> = match (a, b) {
        (Curve::Segment(s1), Curve::Segment(s2)) => segment_segment(s1, s2).into_iter().collect(),
        (Curve::Segment(s), Curve::Arc(c)) | (Curve::Arc(c), Curve::Segment(s)) => {
            segment_circle(s, c.center, c.radius)
        }
        (Curve::Arc(c1), Curve::Arc(c2)) => {
            circle_points(c1.center, c1.radius, c2.center, c2.radius).unwrap_or_default()
        }
    };
    let tol = 4.0 * EPS;
    pts.into_iter()
        .filter_map(|p| {
            let ta = a.param_of(p, tol)?;
            let tb = b.param_of(p, tol)?;
            Some((ta, tb, p))
        })
        .collect()
}

fn segment_segment(s1: &Segment, s2: &Segment) -> Option<Point2> {
    let v1 = s1.direction();
    let v2 = s2.direction();
    let denom = v1.cross(v2);
    if denom.abs() <= 1e-14 * v1.norm() * v2.norm() {
        return None;
    }
    let w = s2.a - s1.a;
    let t = w.cross(v2) / denom;
    let u = w.cross(v1) / denom;
    let (sl1, sl2) = (EPS / v1.norm(), EPS / v2.norm());
    if t < -sl1 || t > 1.0 + sl1 || u < -sl2 || u > 1.0 + sl2 {
        return None;
    }
    Some(s1.a + v1 * t.clamp(0.0, 1.0))
}

fn segment_circle(s: &Segment, c: Point2, r: f64) -> Vec<Point2> {
    let v = s.direction();
    let len = v.norm();
    if len == 0.0 {
        return Vec::new();
    }
    let u = v * (1.0 / len);
    let along = (c - s.a).dot(u);
    let foot = s.a + u * along;
    let dist = foot.distance(c);
    if (dist - r).abs() <= EPS {
        return vec![foot];
    }
    if dist > r {
        return Vec::new();
    }
    let h = (r * r - dist * dist).sqrt();
    vec![foot - u * h, foot + u * h]
}
