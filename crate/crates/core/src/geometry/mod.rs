//! Planar geometry: Delaunay triangulation, alpha shapes and triangle-soup
//! regions with asset holes.

mod alpha;
mod delaunay;
mod region;

pub use alpha::{alpha_shape, circumradius, heron_area};
pub use delaunay::delaunay;
pub use region::Region;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub(crate) fn key(self) -> (u64, u64) {
        (self.x.to_bits(), self.y.to_bits())
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Point,
    pub b: Point,
    pub c: Point,
}

impl Triangle {
    pub const fn new(a: Point, b: Point, c: Point) -> Self {
        Self { a, b, c }
    }

    /// Twice the signed area; positive for counter-clockwise vertices.
    pub fn signed_area2(&self) -> f64 {
        orient(self.a, self.b, self.c)
    }

    pub fn area(&self) -> f64 {
        0.5 * self.signed_area2().abs()
    }

    /// Closed containment: points on edges and vertices are inside.
    pub fn contains(&self, p: Point) -> bool {
        let d1 = orient(self.a, self.b, p);
        let d2 = orient(self.b, self.c, p);
        let d3 = orient(self.c, self.a, p);
        let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
        let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
        !(has_neg && has_pos)
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        segment_distance(p, self.a, self.b)
            .min(segment_distance(p, self.b, self.c))
            .min(segment_distance(p, self.c, self.a))
    }

    pub fn vertices(&self) -> [Point; 3] {
        [self.a, self.b, self.c]
    }

    pub(crate) fn key(&self) -> [(u64, u64); 3] {
        let mut k = [self.a.key(), self.b.key(), self.c.key()];
        k.sort_unstable();
        k
    }
}

/// Closed polygon given by its exterior ring; the ring is implicitly closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetPolygon {
    pub name: String,
    pub exterior: Vec<Point>,
}

impl AssetPolygon {
    pub fn new(name: impl Into<String>, exterior: Vec<Point>) -> Result<Self> {
        let polygon = Self {
            name: name.into(),
            exterior,
        };
        polygon.validate()?;
        Ok(polygon)
    }

    /// Axis-aligned rectangle whose exterior carries a vertex at least every
    /// `spacing` metres along the perimeter.
    pub fn rectangle(
        name: impl Into<String>,
        min: Point,
        max: Point,
        spacing: f64,
    ) -> Result<Self> {
        let corners = [
            min,
            Point::new(max.x, min.y),
            max,
            Point::new(min.x, max.y),
        ];
        let mut exterior = Vec::new();
        for k in 0..4 {
            let (p, q) = (corners[k], corners[(k + 1) % 4]);
            let steps = (p.distance(q) / spacing).ceil().max(1.0) as usize;
            for s in 0..steps {
                let t = s as f64 / steps as f64;
                exterior.push(Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
            }
        }
        Self::new(name, exterior)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.exterior.len();
        if n < 3 {
            return Err(Error::Validation(format!(
                "asset '{}' needs at least 3 vertices",
                self.name
            )));
        }
        if self.exterior.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Validation(format!(
                "asset '{}' has a non-finite vertex",
                self.name
            )));
        }
        let mut keys: Vec<_> = self.exterior.iter().map(|p| p.key()).collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!(
                "asset '{}' repeats a vertex",
                self.name
            )));
        }
        if self.area() <= 0.0 {
            return Err(Error::Validation(format!(
                "asset '{}' has zero area",
                self.name
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        let n = self.exterior.len();
        let mut twice = 0.0;
        for k in 0..n {
            let (p, q) = (self.exterior[k], self.exterior[(k + 1) % n]);
            twice += p.x * q.y - q.x * p.y;
        }
        0.5 * twice.abs()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.exterior.len();
        (0..n).map(move |k| (self.exterior[k], self.exterior[(k + 1) % n]))
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        self.edges().any(|(a, b)| segment_distance(p, a, b) <= 1e-12)
    }

    /// Closed containment (boundary points are inside).
    pub fn contains(&self, p: Point) -> bool {
        self.on_boundary(p) || crossing_test(&self.exterior, p)
    }

    /// Open containment (boundary points are outside).
    pub fn strictly_contains(&self, p: Point) -> bool {
        !self.on_boundary(p) && crossing_test(&self.exterior, p)
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.exterior {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }
}

#[inline]
pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

pub(crate) fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Even-odd ray crossing test.
fn crossing_test(ring: &[Point], p: Point) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}
