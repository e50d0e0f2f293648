use serde::{Deserialize, Serialize};

use super::point::{BBox, Point2};
use super::GeomError;

/// Strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Validates convexity. Clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self, GeomError> {
        if vertices.len() < 3 {
            return Err(GeomError::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidPolygon("non-finite vertex".into()));
        }
        let signed: f64 = (0..vertices.len())
            .map(|k| vertices[k].cross(vertices[(k + 1) % vertices.len()]))
            .sum();
        if signed < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for k in 0..n {
            let (a, b, c) = (vertices[k], vertices[(k + 1) % n], vertices[(k + 2) % n]);
            if (b - a).cross(c - b) <= 0.0 {
                return Err(GeomError::InvalidPolygon(format!(
                    "vertex {} breaks strict convexity",
                    (k + 1) % n
                )));
            }
        }
        // A star polygon passes the turn test but winds more than once.
        let turning: f64 = (0..n)
            .map(|k| {
                let (a, b, c) = (vertices[k], vertices[(k + 1) % n], vertices[(k + 2) % n]);
                let (u, v) = (b - a, c - b);
                u.cross(v).atan2(u.dot(v))
            })
            .sum();
        if (turning - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(GeomError::InvalidPolygon("self-intersecting".into()));
        }
        Ok(Self { vertices })
    }

    pub fn rectangle(min: Point2, max: Point2) -> Result<Self, GeomError> {
        Self::new(vec![
            min,
            Point2::new(max.x, min.y),
            max,
            Point2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn bbox(&self) -> BBox {
        let mut b = BBox::empty();
        for v in &self.vertices {
            b.include(*v);
        }
        b
    }

    /// Signed distance to the boundary: positive inside.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let inside = self.contains(p);
        let d = self
            .edges()
            .map(|(a, b)| segment_distance(a, b, p))
            .fold(f64::INFINITY, f64::min);
        if inside {
            d
        } else {
            -d
        }
    }

    /// Closed containment.
    pub fn contains(&self, p: Point2) -> bool {
        self.edges().all(|(a, b)| (b - a).cross(p - a) >= 0.0)
    }

    /// Nearest point of the polygon (identity for points inside).
    pub fn project(&self, p: Point2) -> Point2 {
        if self.contains(p) {
            return p;
        }
        self.edges()
            .map(|(a, b)| {
                let v = b - a;
                let t = ((p - a).dot(v) / v.norm_sq()).clamp(0.0, 1.0);
                a + v * t
            })
            .min_by(|x, y| x.distance(p).total_cmp(&y.distance(p)))
            .unwrap_or(p)
    }
}

fn segment_distance(a: Point2, b: Point2, p: Point2) -> f64 {
    let v = b - a;
    let t = ((p - a).dot(v) / v.norm_sq()).clamp(0.0, 1.0);
    (a + v * t).distance(p)
}

impl TryFrom<Vec<Point2>> for ConvexPolygon {
    type Error = GeomError;
    fn try_from(v: Vec<Point2>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Point2> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}
