use std::collections::{HashMap, HashSet};

use rand::Rng;

use super::{AssetPolygon, Point, Triangle};
use crate::error::{Error, Result};

/// Rejection attempts allowed per requested sample.
const REJECTION_BUDGET: usize = 10_000;

/// Planar point set stored as a soup of closed triangles minus open asset
/// holes, or the whole plane.
///
/// A point belongs to the region when it lies in some triangle and strictly
/// inside no hole. Holes apply to the region as a whole, so a union keeps the
/// holes of both operands.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    all_plane: bool,
    triangles: Vec<Triangle>,
    holes: Vec<AssetPolygon>,
}

impl Region {
    pub fn all_plane() -> Self {
        Self {
            all_plane: true,
            triangles: Vec::new(),
            holes: Vec::new(),
        }
    }

    pub fn empty() -> Self {
        Self {
            all_plane: false,
            triangles: Vec::new(),
            holes: Vec::new(),
        }
    }

    /// Duplicate triangles (same vertex set) are kept once.
    pub fn from_triangles(triangles: Vec<Triangle>) -> Self {
        let mut region = Self::empty();
        region.extend_triangles(triangles);
        region
    }

    fn extend_triangles(&mut self, triangles: impl IntoIterator<Item = Triangle>) {
        let mut seen: HashSet<_> = self.triangles.iter().map(Triangle::key).collect();
        for t in triangles {
            if seen.insert(t.key()) {
                self.triangles.push(t);
            }
        }
    }

    pub fn is_all_plane(&self) -> bool {
        self.all_plane
    }

    /// True for a region with no triangles (and not the whole plane).
    pub fn is_empty(&self) -> bool {
        !self.all_plane && self.triangles.is_empty()
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn holes(&self) -> &[AssetPolygon] {
        &self.holes
    }

    /// Sum of triangle areas, ignoring overlaps and holes.
    pub fn triangle_area(&self) -> f64 {
        self.triangles.iter().map(Triangle::area).sum()
    }

    pub fn contains(&self, p: Point) -> bool {
        if self.all_plane {
            return true;
        }
        self.triangles.iter().any(|t| t.contains(p)) && !self.in_hole(p)
    }

    fn in_hole(&self, p: Point) -> bool {
        self.holes.iter().any(|h| h.strictly_contains(p))
    }

    /// Distance from `p` to the region; zero exactly when `p` is contained.
    /// Points inside a hole measure to the boundary of the holes that hold
    /// them. An empty region is infinitely far from everything.
    pub fn distance(&self, p: Point) -> f64 {
        if self.all_plane {
            return 0.0;
        }
        if self.triangles.is_empty() {
            return f64::INFINITY;
        }
        if self.triangles.iter().any(|t| t.contains(p)) {
            let to_hole_edge = self
                .holes
                .iter()
                .filter(|h| h.strictly_contains(p))
                .map(|h| h.boundary_distance(p))
                .fold(0.0, f64::max);
            return to_hole_edge;
        }
        self.triangles
            .iter()
            .map(|t| t.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn union(&self, other: &Region) -> Region {
        if self.all_plane || other.all_plane {
            return Region::all_plane();
        }
        let mut out = self.clone();
        out.extend_triangles(other.triangles.iter().copied());
        for hole in &other.holes {
            if !out.holes.contains(hole) {
                out.holes.push(hole.clone());
            }
        }
        out
    }

    pub fn subtract_assets(&self, assets: &[AssetPolygon]) -> Region {
        let mut out = self.clone();
        if out.all_plane {
            // the whole plane stays the direct-search region
            return out;
        }
        for asset in assets {
            if !out.holes.contains(asset) {
                out.holes.push(asset.clone());
            }
        }
        out
    }

    /// Independent uniform samples over the region.
    ///
    /// A triangle is drawn with probability proportional to its area, a point
    /// uniformly inside it, and the point is kept with probability one over
    /// the number of triangles covering it (so overlaps are not favoured) and
    /// only if it is outside every hole.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<Point>> {
        if self.all_plane {
            return Err(Error::Sampling("cannot sample the unbounded plane".into()));
        }
        let mut cumulative = Vec::with_capacity(self.triangles.len());
        let mut total = 0.0;
        for t in &self.triangles {
            total += t.area();
            cumulative.push(total);
        }
        if !(total > 0.0) {
            return Err(Error::Sampling("region has zero area".into()));
        }
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        let budget = REJECTION_BUDGET.saturating_mul(count.max(1));
        while out.len() < count {
            attempts += 1;
            if attempts > budget {
                return Err(Error::Sampling(format!(
                    "rejection budget exhausted after {budget} attempts"
                )));
            }
            let pick = rng.gen::<f64>() * total;
            let k = cumulative.partition_point(|&c| c <= pick).min(cumulative.len() - 1);
            let p = sample_triangle(&self.triangles[k], rng);
            if self.in_hole(p) {
                continue;
            }
            let cover = self.triangles.iter().filter(|t| t.contains(p)).count().max(1);
            if cover > 1 && rng.gen::<f64>() * cover as f64 >= 1.0 {
                continue;
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Boundary of the triangle soup as polylines: edges used by exactly one
    /// triangle, chained end to end. Closed loops repeat their first vertex.
    pub fn exteriors(&self) -> Vec<Vec<Point>> {
        type EdgeKey = ((u64, u64), (u64, u64));
        let mut uses: HashMap<EdgeKey, (usize, Point, Point)> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t.a, t.b), (t.b, t.c), (t.c, t.a)] {
                let key = if a.key() <= b.key() {
                    (a.key(), b.key())
                } else {
                    (b.key(), a.key())
                };
                uses.entry(key).or_insert((0, a, b)).0 += 1;
            }
        }
        let mut edges: Vec<(Point, Point)> = uses
            .into_values()
            .filter(|(n, _, _)| *n == 1)
            .map(|(_, a, b)| (a, b))
            .collect();
        edges.sort_by(|x, y| {
            (x.0.key(), x.1.key()).cmp(&(y.0.key(), y.1.key()))
        });

        let mut at: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
        for (k, (a, b)) in edges.iter().enumerate() {
            at.entry(a.key()).or_default().push(k);
            at.entry(b.key()).or_default().push(k);
        }
        let mut used = vec![false; edges.len()];
        let mut lines = Vec::new();
        for start in 0..edges.len() {
            if used[start] {
                continue;
            }
            used[start] = true;
            let (a, b) = edges[start];
            let mut line = vec![a, b];
            let mut tip = b;
            while let Some(&next) = at[&tip.key()].iter().find(|&&e| !used[e]) {
                used[next] = true;
                let (p, q) = edges[next];
                tip = if p.key() == tip.key() { q } else { p };
                line.push(tip);
                if tip.key() == a.key() {
                    break;
                }
            }
            lines.push(line);
        }
        lines
    }
}

fn sample_triangle<R: Rng + ?Sized>(t: &Triangle, rng: &mut R) -> Point {
    let (mut r1, mut r2): (f64, f64) = (rng.gen(), rng.gen());
    if r1 + r2 > 1.0 {
        r1 = 1.0 - r1;
        r2 = 1.0 - r2;
    }
    Point::new(
        t.a.x + r1 * (t.b.x - t.a.x) + r2 * (t.c.x - t.a.x),
        t.a.y + r1 * (t.b.y - t.a.y) + r2 * (t.c.y - t.a.y),
    )
}
