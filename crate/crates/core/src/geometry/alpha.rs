use super::{delaunay, Point, Region, Triangle};

/// Triangle area from its three edge lengths.
pub fn heron_area(d_a: f64, d_b: f64, d_c: f64) -> f64 {
    let s = 0.5 * (d_a + d_b + d_c);
    let radicand = s * (s - d_a) * (s - d_b) * (s - d_c);
    if radicand > 0.0 {
        radicand.sqrt()
    } else {
        0.0
    }
}

/// Circumradius `d_a d_b d_c / 4A`, or `None` for a degenerate triangle.
pub fn circumradius(t: &Triangle) -> Option<f64> {
    let d_a = t.a.distance(t.b);
    let d_b = t.b.distance(t.c);
    let d_c = t.c.distance(t.a);
    let area = heron_area(d_a, d_b, d_c);
    if area == 0.0 {
        None
    } else {
        Some(d_a * d_b * d_c / (4.0 * area))
    }
}

/// Edelsbrunner alpha shape: the Delaunay triangles of `points` with
/// positive area and circumradius strictly below `alpha`.
pub fn alpha_shape(points: &[Point], alpha: f64) -> Region {
    if points.len() < 3 {
        return Region::empty();
    }
    let triangles = delaunay(points)
        .into_iter()
        .filter(|t| circumradius(t).is_some_and(|r| r < alpha))
        .collect();
    Region::from_triangles(triangles)
}
