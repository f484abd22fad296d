use std::collections::{HashMap, HashSet, VecDeque};

use super::{orient, Point, Triangle};

/// Super-triangle vertices sit this many bounding-box spans away from the
/// input so that hull triangles are not shadowed by them.
const SUPER_SCALE: f64 = 1.0e3;

/// Delaunay triangulation by incremental Bowyer-Watson insertion.
///
/// Exact duplicate points are ignored. Fewer than three distinct points or a
/// collinear input yield an empty triangulation. Output triangles are
/// counter-clockwise.
pub fn delaunay(points: &[Point]) -> Vec<Triangle> {
    let mut seen = HashSet::new();
    let mut pts: Vec<Point> = points
        .iter()
        .copied()
        .filter(|p| p.x.is_finite() && p.y.is_finite() && seen.insert(p.key()))
        .collect();
    let n = pts.len();
    if n < 3 || all_collinear(&pts) {
        return Vec::new();
    }

    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
    let mid = Point::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
    let r = SUPER_SCALE * span;
    pts.push(Point::new(mid.x - 2.0 * r, mid.y - r));
    pts.push(Point::new(mid.x + 2.0 * r, mid.y - r));
    pts.push(Point::new(mid.x, mid.y + 2.0 * r));

    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for p_idx in 0..n {
        let p = pts[p_idx];
        let bad: Vec<usize> = (0..tris.len())
            .filter(|&t| in_circumcircle(&pts, tris[t], p))
            .collect();
        let cavity = connected_cavity(&pts, &tris, &bad, p);

        let mut edge_count: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
        for &t in &cavity {
            let [a, b, c] = tris[t];
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let key = (u.min(v), u.max(v));
                edge_count.entry(key).or_insert((0, (u, v))).0 += 1;
            }
        }
        let mut boundary: Vec<(usize, usize)> = edge_count
            .into_values()
            .filter(|(count, _)| *count == 1)
            .map(|(_, e)| e)
            .collect();
        boundary.sort_unstable();

        let mut doomed = cavity;
        doomed.sort_unstable_by(|a, b| b.cmp(a));
        for t in doomed {
            tris.swap_remove(t);
        }
        for (a, b) in boundary {
            if orient(pts[a], pts[b], p) > 0.0 {
                tris.push([a, b, p_idx]);
            }
        }
    }

    tris.into_iter()
        .filter(|t| t.iter().all(|&v| v < n))
        .map(|[a, b, c]| Triangle::new(pts[a], pts[b], pts[c]))
        .collect()
}

fn all_collinear(pts: &[Point]) -> bool {
    let a = pts[0];
    let Some(b) = pts.iter().copied().find(|q| *q != a) else {
        return true;
    };
    pts.iter().all(|&c| orient(a, b, c) == 0.0)
}

/// True when `p` lies strictly inside the circumcircle of the
/// counter-clockwise triangle `t`.
fn in_circumcircle(pts: &[Point], t: [usize; 3], p: Point) -> bool {
    incircle(pts[t[0]], pts[t[1]], pts[t[2]], p) > 0.0
}

pub(crate) fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

/// Restricts the conflicting triangles to the edge-connected component that
/// holds `p`, which keeps the cavity star-shaped under rounding.
fn connected_cavity(pts: &[Point], tris: &[[usize; 3]], bad: &[usize], p: Point) -> Vec<usize> {
    let contains = |t: usize| {
        let [a, b, c] = tris[t];
        Triangle::new(pts[a], pts[b], pts[c]).contains(p)
    };
    let Some(seed) = bad.iter().copied().find(|&t| contains(t)) else {
        return bad.to_vec();
    };
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for &t in bad {
        let [a, b, c] = tris[t];
        for (u, v) in [(a, b), (b, c), (c, a)] {
            by_edge.entry((u.min(v), u.max(v))).or_default().push(t);
        }
    }
    let mut keep = HashSet::from([seed]);
    let mut queue = VecDeque::from([seed]);
    while let Some(t) = queue.pop_front() {
        let [a, b, c] = tris[t];
        for (u, v) in [(a, b), (b, c), (c, a)] {
            for &other in &by_edge[&(u.min(v), u.max(v))] {
                if keep.insert(other) {
                    queue.push_back(other);
                }
            }
        }
    }
    let mut out: Vec<usize> = keep.into_iter().collect();
    out.sort_unstable();
    out
}
