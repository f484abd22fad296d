//! Reverse-time pathlines through recorded flow snapshots and the pathtube
//! point clouds built from them.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::GridSpec;
use crate::swe::SimulationRecord;

/// Depth that counts as wet, in metres.
pub const DEFAULT_WET_DEPTH: f64 = 1e-3;
/// Depth and speed below which a trace stops.
pub const DEFAULT_MOTION_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlineConfig {
    pub wet_depth: f64,
    pub motion_threshold: f64,
    pub max_length: f64,
    /// Steps longer than twice this are treated as jumps and end the trace.
    pub jump_guard: f64,
}

impl PathlineConfig {
    /// Defaults for a grid: four domain diagonals of length and the default
    /// alpha-shape radius as jump guard.
    pub fn for_grid(grid: &GridSpec) -> Self {
        Self {
            wet_depth: DEFAULT_WET_DEPTH,
            motion_threshold: DEFAULT_MOTION_THRESHOLD,
            max_length: 4.0 * grid.diagonal(),
            jump_guard: default_alpha(grid),
        }
    }

    pub fn with_jump_guard(mut self, alpha: f64) -> Self {
        self.jump_guard = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.wet_depth,
            self.motion_threshold,
            self.max_length,
            self.jump_guard,
        ]
        .iter()
        .all(|v| *v > 0.0 && !v.is_nan());
        if !positive {
            return Err(Error::Usage("pathline settings must be positive".into()));
        }
        if self.motion_threshold >= self.wet_depth {
            return Err(Error::Usage(
                "motion threshold must be below the wet depth".into(),
            ));
        }
        Ok(())
    }
}

/// Alpha-shape radius of 2.5 cell sizes per axis, `5 (dx + dy) / 2`.
pub fn default_alpha(grid: &GridSpec) -> f64 {
    5.0 * (grid.cell_size + grid.cell_size) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pathline {
    pub seed: Point,
    /// Saved points, starting with the seed.
    pub points: Vec<Point>,
    pub wet_time: Option<f64>,
    /// Integrated arc length, including the unsaved tail.
    pub length: f64,
}

/// Earliest snapshot time at which the cell holding `(x, y)` is at least
/// `wet_depth` deep.
pub fn wet_time(record: &SimulationRecord, x: f64, y: f64, wet_depth: f64) -> Result<Option<f64>> {
    let grid = record.spec();
    let (i, j) = grid.get_index(x, y)?;
    let k = grid.index(i, j);
    Ok(record
        .snapshots
        .iter()
        .find(|s| s.h[k] >= wet_depth)
        .map(|s| s.time))
}

/// Cell values of snapshot `snap` at `(x, y)`: depth and velocity.
fn probe(record: &SimulationRecord, snap: usize, x: f64, y: f64) -> Result<(f64, f64, f64)> {
    let grid = record.spec();
    let (i, j) = grid.get_index(x, y)?;
    let k = grid.index(i, j);
    let s = &record.snapshots[snap];
    let (u, v) = s.velocity(k);
    Ok((s.h[k], u, v))
}

/// Traces backwards in time from the moment `(x0, y0)` first wets, following
/// the recorded velocities with a two-stage predictor-corrector.
pub fn compute_pathline(
    record: &SimulationRecord,
    x0: f64,
    y0: f64,
    config: &PathlineConfig,
) -> Result<Pathline> {
    let grid = *record.spec();
    let seed = Point::new(x0, y0);
    let t_wet = wet_time(record, x0, y0, config.wet_depth)?;
    let mut line = Pathline {
        seed,
        points: vec![seed],
        wet_time: t_wet,
        length: 0.0,
    };
    let Some(t_wet) = t_wet else {
        return Ok(line);
    };
    let save_spacing = 0.5 * (grid.cell_size + grid.cell_size);
    let (mut x, mut y, mut t) = (x0, y0, t_wet);
    let mut since_saved = 0.0;

    while line.length < config.max_length && t >= record.t0 && t <= t_wet {
        let k = record.nearest_snapshot(t);
        let (h, u, v) = probe(record, k, x, y)?;
        if u.hypot(v) <= config.motion_threshold || h <= config.motion_threshold {
            break;
        }
        let dt = -(grid.cell_size / u.abs()).min(grid.cell_size / v.abs()) / 3.0;
        let (xp, yp, tp) = (x + u * dt, y + v * dt, t + dt);
        if !grid.contains(xp, yp) {
            break;
        }
        let kp = record.nearest_snapshot(tp);
        let (hp, up, vp) = probe(record, kp, xp, yp)?;
        if hp <= config.motion_threshold {
            break;
        }
        let xn = x + 0.5 * dt * (u + up);
        let yn = y + 0.5 * dt * (v + vp);
        let ds = (xn - x).hypot(yn - y);
        if !grid.contains(xn, yn) || ds <= config.motion_threshold || ds > 2.0 * config.jump_guard {
            break;
        }
        line.length += ds;
        since_saved += ds;
        (x, y, t) = (xn, yn, tp);
        if since_saved >= save_spacing {
            since_saved = 0.0;
            line.points.push(Point::new(xn, yn));
        }
    }
    Ok(line)
}

/// Union of the pathlines seeded at every vertex of `exterior`, with exact
/// duplicates removed and first-seen order kept.
pub fn pathtube_points(
    record: &SimulationRecord,
    exterior: &[Point],
    config: &PathlineConfig,
) -> Result<Vec<Point>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for seed in exterior {
        let line = compute_pathline(record, seed.x, seed.y, config)?;
        for p in line.points {
            if seen.insert(p.key()) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// All pathlines of a seed set, in seed order.
pub fn pathlines(
    record: &SimulationRecord,
    exterior: &[Point],
    config: &PathlineConfig,
) -> Result<Vec<Pathline>> {
    exterior
        .iter()
        .map(|p| compute_pathline(record, p.x, p.y, config))
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::grid::ScalarField;
    use crate::swe::FlowState;

    /// Steady record whose snapshots at `times` share one depth and velocity
    /// field evaluated at cell centres.
    pub(crate) fn steady_record(
        grid: GridSpec,
        times: &[f64],
        field: impl Fn(f64, f64) -> (f64, f64, f64),
    ) -> SimulationRecord {
        let mut base = FlowState::dry(grid);
        for j in 0..grid.n_rows {
            for i in 0..grid.n_cols {
                let (x, y) = grid.cell_center(i, j).unwrap();
                let (h, u, v) = field(x, y);
                let k = grid.index(i, j);
                base.h[k] = h;
                base.hu[k] = h * u;
                base.hv[k] = h * v;
            }
        }
        let snapshots: Vec<FlowState> = times
            .iter()
            .map(|&t| FlowState {
                time: t,
                ..base.clone()
            })
            .collect();
        SimulationRecord {
            max_depth: ScalarField::from_values(grid, base.h.clone()).unwrap(),
            t0: times[0],
            tf: *times.last().unwrap(),
            snapshots,
            inflow_volume: 0.0,
            outflow_volume: 0.0,
            steps: 0,
        }
    }

    /// Marks the cell of `p` dry in every snapshot before `t`, so it wets at `t`.
    pub(crate) fn dry_until(record: &mut SimulationRecord, p: Point, t: f64) {
        let grid = *record.spec();
        let (i, j) = grid.get_index(p.x, p.y).unwrap();
        let k = grid.index(i, j);
        for s in record.snapshots.iter_mut().filter(|s| s.time < t) {
            s.h[k] = 0.0;
            s.hu[k] = 0.0;
            s.hv[k] = 0.0;
        }
    }

    fn every_second(end: usize) -> Vec<f64> {
        (0..=end).map(|k| k as f64).collect()
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, n, 1.0, 0.0, 0.0).unwrap()
    }

    fn long_config(g: &GridSpec) -> PathlineConfig {
        PathlineConfig {
            max_length: 1e6,
            ..PathlineConfig::for_grid(g)
        }
    }

    #[test]
    fn wet_time_scans_snapshots() {
        let g = grid(4);
        let times: Vec<f64> = (0..8).map(|k| k as f64).collect();
        let mut record = steady_record(g, &times, |_, _| (0.0, 0.0, 0.0));
        // depth crosses 1 mm between snapshots 3 and 4
        for (k, s) in record.snapshots.iter_mut().enumerate() {
            s.h[g.index(1, 2)] = 4e-4 * k as f64;
        }
        assert_eq!(wet_time(&record, 1.5, 2.5, 1e-3).unwrap(), Some(3.0));
        let h3 = record.snapshots[3].h[g.index(1, 2)];
        assert!(h3 >= 1e-3, "{h3}");
        for s in record.snapshots.iter_mut() {
            s.h[g.index(1, 2)] *= 0.5;
        }
        // 2e-4 k crosses 1e-3 at k = 5
        assert_eq!(wet_time(&record, 1.5, 2.5, 1e-3).unwrap(), Some(5.0));
        assert_eq!(wet_time(&record, 0.5, 0.5, 1e-3).unwrap(), None);
        assert!(wet_time(&record, -1.0, 0.5, 1e-3).is_err());
    }

    #[test]
    fn wet_from_start() {
        let g = grid(4);
        let record = steady_record(g, &[2.0, 3.0], |_, _| (0.5, 0.0, 0.0));
        assert_eq!(wet_time(&record, 1.0, 1.0, 1e-3).unwrap(), Some(2.0));
    }

    #[test]
    fn zero_field_gives_seed_only() {
        let g = grid(16);
        let record = steady_record(g, &[0.0, 10.0], |_, _| (1.0, 0.0, 0.0));
        let line = compute_pathline(&record, 8.0, 8.0, &long_config(&g)).unwrap();
        assert_eq!(line.points, vec![Point::new(8.0, 8.0)]);
    }

    #[test]
    fn never_wet_seed_gives_seed_only() {
        let g = grid(16);
        let record = steady_record(g, &[0.0, 10.0], |_, _| (0.0, 1.0, 0.0));
        let line = compute_pathline(&record, 8.0, 8.0, &long_config(&g)).unwrap();
        assert_eq!(line.wet_time, None);
        assert_eq!(line.points.len(), 1);
    }

    #[test]
    fn uniform_flow_traces_straight_line_upstream() {
        let g = grid(64);
        let mut record = steady_record(g, &every_second(100), |_, _| (1.0, 1.0, 0.0));
        let seed = Point::new(32.3, 32.7);
        dry_until(&mut record, seed, 50.0);
        let line = compute_pathline(&record, seed.x, seed.y, &long_config(&g)).unwrap();
        assert_eq!(line.wet_time, Some(50.0));
        assert!(line.points.len() > 10);
        for w in line.points.windows(2) {
            assert!(w[1].x < w[0].x);
            assert!((w[1].y - seed.y).abs() <= 1e-9);
            // steps of a third of a cell; saving needs one cell of arc
            let gap = w[0].x - w[1].x;
            assert!((1.0 - 1e-9..=4.0 / 3.0 + 1e-9).contains(&gap), "gap {gap}");
        }
        // x(t) = x0 - (t_wet - t) reaches the west edge before t = t0
        let last = line.points.last().unwrap();
        assert!(last.x < 1.5);
        assert!((line.length - (seed.x - last.x)).abs() < 1.5);
    }

    #[test]
    fn trace_stops_at_start_time() {
        let g = grid(64);
        let mut record = steady_record(g, &every_second(20), |_, _| (1.0, 1.0, 0.0));
        let seed = Point::new(60.5, 20.5);
        dry_until(&mut record, seed, 10.0);
        let line = compute_pathline(&record, seed.x, seed.y, &long_config(&g)).unwrap();
        // ten seconds at 1 m/s; rounding of t decides whether the step
        // landing on t0 runs once more
        assert!(
            line.length > 10.0 - 1e-9 && line.length < 10.0 + 1.0 / 3.0 + 1e-9,
            "{}",
            line.length
        );
    }

    #[test]
    fn wet_at_start_allows_one_step() {
        let g = grid(64);
        let record = steady_record(g, &[0.0, 10.0], |_, _| (1.0, 1.0, 0.0));
        let line = compute_pathline(&record, 40.0, 20.0, &long_config(&g)).unwrap();
        assert_eq!(line.wet_time, Some(0.0));
        assert_eq!(line.points.len(), 1);
        assert!((line.length - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_field_stays_on_circle() {
        let g = GridSpec::new(200, 200, 0.5, -50.0, -50.0).unwrap();
        let omega = 0.05;
        let mut record = steady_record(g, &[0.0, 1000.0, 2000.0], |x, y| (1.0, -omega * y, omega * x));
        let seed = Point::new(30.0, 0.0);
        dry_until(&mut record, seed, 1000.0);
        let config = PathlineConfig {
            max_length: 2.0 * std::f64::consts::PI * 30.0,
            ..PathlineConfig::for_grid(&g)
        };
        let line = compute_pathline(&record, seed.x, seed.y, &config).unwrap();
        assert!(line.points.len() > 100);
        for p in &line.points {
            let r = p.x.hypot(p.y);
            assert!((r - 30.0).abs() <= 0.02 * 30.0, "radius {r}");
        }
        // reverse time turns clockwise: the first saved point has y < 0
        assert!(line.points[1].y < 0.0);
    }

    #[test]
    fn length_bounded_and_points_in_domain() {
        let g = grid(32);
        let mut record = steady_record(g, &every_second(500), |x, y| {
            (1.0, -(y - 16.0) * 0.1, (x - 16.0) * 0.1)
        });
        let seed = Point::new(26.0, 16.0);
        dry_until(&mut record, seed, 400.0);
        let config = PathlineConfig {
            max_length: 40.0,
            ..PathlineConfig::for_grid(&g)
        };
        let line = compute_pathline(&record, seed.x, seed.y, &config).unwrap();
        assert!(line.length >= 39.0);
        // one step moves at most a third of a cell along each axis
        assert!(line.length <= 40.0 + 2f64.sqrt() / 3.0 + 1e-9);
        assert!(line.points.iter().all(|p| g.contains(p.x, p.y)));
    }

    #[test]
    fn pathtube_merges_seed_rows() {
        let g = grid(64);
        let mut record = steady_record(g, &every_second(100), |_, _| (1.0, 1.0, 0.0));
        let seeds = [Point::new(40.0, 10.5), Point::new(40.0, 20.5)];
        for s in seeds {
            dry_until(&mut record, s, 50.0);
        }
        let config = long_config(&g);
        assert!(pathtube_points(&record, &[], &config).unwrap().is_empty());
        let one = compute_pathline(&record, 40.0, 10.5, &config).unwrap();
        assert!(one.points.len() > 10);
        let tube = pathtube_points(&record, &seeds, &config).unwrap();
        assert_eq!(tube.len(), 2 * one.points.len());
        assert!(tube.iter().all(|p| p.y == 10.5 || p.y == 20.5));
        let dup = pathtube_points(&record, &[seeds[0], seeds[0]], &config).unwrap();
        assert_eq!(dup, one.points);
    }

    #[test]
    fn out_of_domain_seed_is_rejected() {
        let g = grid(8);
        let record = steady_record(g, &[0.0, 1.0], |_, _| (1.0, 1.0, 0.0));
        assert!(compute_pathline(&record, 9.0, 1.0, &long_config(&g)).is_err());
    }
}
