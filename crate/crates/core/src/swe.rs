//! Explicit finite-volume solver for the two-dimensional shallow water
//! equations with volumetric inflow, bed-slope and Manning friction sources.
//!
//! Space: central-upwind numerical fluxes on a MUSCL reconstruction
//! (minmod-limited slopes of depth, free surface and velocity) with
//! hydrostatic reconstruction at every face, which keeps lake-at-rest states
//! exact over discontinuous beds such as walls. Time: Heun's method (SSP-RK2).
//! Each stage limits the outgoing mass flux of nearly drained cells so that
//! depth never becomes negative while mass stays conserved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

pub const DEFAULT_GRAVITY: f64 = 9.81;
/// Cells shallower than this carry no velocity.
pub const DRY_DEPTH: f64 = 1e-6;
pub const CFL: f64 = 0.45;
const MIN_TIME_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Friction {
    Frictionless,
    Manning { n: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Open boundary: ghost cells mirror the interior with zero free-surface
    /// gradient. Water may leave the domain but never enter it.
    CriticalDepth,
    /// Solid wall; used for closed-domain checks.
    Reflective,
}

/// Discharge released at a point, piecewise constant in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointInflow {
    pub x: f64,
    pub y: f64,
    /// `(start_time_s, discharge_m3_per_s)` steps in increasing start time.
    /// Discharge is zero before the first step; the last step holds forever.
    pub hydrograph: Vec<(f64, f64)>,
}

impl PointInflow {
    pub fn validate(&self) -> Result<()> {
        let mut last = f64::NEG_INFINITY;
        for &(t, q) in &self.hydrograph {
            if !t.is_finite() || !q.is_finite() {
                return Err(Error::Validation("inflow hydrograph must be finite".into()));
            }
            if t <= last {
                return Err(Error::Validation(
                    "inflow hydrograph times must be strictly increasing".into(),
                ));
            }
            last = t;
        }
        Ok(())
    }

    /// Volume released during `[a, b]`.
    pub fn volume_between(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for (k, &(start, q)) in self.hydrograph.iter().enumerate() {
            let end = self
                .hydrograph
                .get(k + 1)
                .map_or(f64::INFINITY, |&(next, _)| next);
            let lo = start.max(a);
            let hi = end.min(b);
            if hi > lo {
                total += q * (hi - lo);
            }
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceTerms {
    #[serde(default)]
    pub inflows: Vec<PointInflow>,
    pub friction: Friction,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
}

fn default_gravity() -> f64 {
    DEFAULT_GRAVITY
}

impl Default for SourceTerms {
    fn default() -> Self {
        Self {
            inflows: Vec::new(),
            friction: Friction::Frictionless,
            gravity: DEFAULT_GRAVITY,
        }
    }
}

impl SourceTerms {
    pub fn validate(&self) -> Result<()> {
        if !(self.gravity > 0.0 && self.gravity.is_finite()) {
            return Err(Error::Validation("gravity must be positive".into()));
        }
        if let Friction::Manning { n } = self.friction {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(Error::Validation(format!(
                    "Manning coefficient must be non-negative, got {n}"
                )));
            }
        }
        for inflow in &self.inflows {
            inflow.validate()?;
        }
        Ok(())
    }
}

/// Conserved variables `(h, hu, hv)` on a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub spec: GridSpec,
    pub h: Vec<f64>,
    pub hu: Vec<f64>,
    pub hv: Vec<f64>,
    pub time: f64,
}

impl FlowState {
    pub fn dry(spec: GridSpec) -> Self {
        let n = spec.len();
        Self {
            spec,
            h: vec![0.0; n],
            hu: vec![0.0; n],
            hv: vec![0.0; n],
            time: 0.0,
        }
    }

    /// Still water with the given depth.
    pub fn at_rest(depth: &ScalarField) -> Result<Self> {
        if let Some(v) = depth.values().iter().find(|v| **v < 0.0) {
            return Err(Error::Usage(format!("negative initial depth {v}")));
        }
        let mut state = Self::dry(*depth.spec());
        state.h.copy_from_slice(depth.values());
        Ok(state)
    }

    pub fn volume(&self) -> f64 {
        self.h.iter().sum::<f64>() * self.spec.cell_area()
    }

    /// Velocity of cell `k`, zero in dry cells.
    #[inline]
    pub fn velocity(&self, k: usize) -> (f64, f64) {
        let h = self.h[k];
        if h >= DRY_DEPTH {
            let inv = 1.0 / h;
            (self.hu[k] * inv, self.hv[k] * inv)
        } else {
            (0.0, 0.0)
        }
    }

    pub fn depth_field(&self) -> ScalarField {
        ScalarField::from_values(self.spec, self.h.clone())
            .expect("flow state depth has grid length")
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.spec.len();
        if self.h.len() != n || self.hu.len() != n || self.hv.len() != n {
            return Err(Error::Usage("flow state arrays do not match grid".into()));
        }
        Ok(())
    }

    fn is_finite(&self) -> bool {
        self.h.iter().chain(&self.hu).chain(&self.hv).all(|v| v.is_finite())
    }
}

/// Periodic snapshots of a run plus the running per-cell maximum depth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub snapshots: Vec<FlowState>,
    /// Maximum depth per cell, sampled after every internal time step.
    pub max_depth: ScalarField,
    pub t0: f64,
    pub tf: f64,
    /// Volume added by point inflows over the run.
    pub inflow_volume: f64,
    /// Volume that left through open boundaries over the run.
    pub outflow_volume: f64,
    pub steps: usize,
}

impl SimulationRecord {
    pub fn spec(&self) -> &GridSpec {
        self.max_depth.spec()
    }

    pub fn timestamps(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|s| s.time)
    }

    /// Index of the snapshot closest in time to `t`; ties go to the earlier one.
    pub fn nearest_snapshot(&self, t: f64) -> usize {
        let times = &self.snapshots;
        let upper = times.partition_point(|s| s.time < t);
        if upper == 0 {
            return 0;
        }
        if upper == times.len() {
            return times.len() - 1;
        }
        let below = upper - 1;
        if t - times[below].time <= times[upper].time - t {
            below
        } else {
            upper
        }
    }
}

/// Report times `t0 + k * interval` for `k = 0..=count`.
fn report_count(duration: f64, report_interval: f64) -> Result<usize> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Usage(format!("duration must be positive, got {duration}")));
    }
    if !(report_interval > 0.0 && report_interval.is_finite()) {
        return Err(Error::Usage(format!(
            "report interval must be positive, got {report_interval}"
        )));
    }
    let ratio = duration / report_interval;
    let count = ratio.round();
    if count < 1.0 || (ratio - count).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Usage(format!(
            "report interval {report_interval} does not divide duration {duration}"
        )));
    }
    Ok(count as usize)
}

/// Runs the solver on `terrain + structures` from `initial` for `duration`
/// seconds, keeping a snapshot every `report_interval` seconds.
pub fn simulate(
    terrain: &ScalarField,
    structures: &ScalarField,
    initial: &FlowState,
    sources: &SourceTerms,
    boundary: Boundary,
    duration: f64,
    report_interval: f64,
) -> Result<SimulationRecord> {
    if terrain.spec() != structures.spec() || terrain.spec() != &initial.spec {
        return Err(Error::Usage(
            "terrain, structure field and initial state use different grids".into(),
        ));
    }
    if structures.values().iter().any(|v| *v < 0.0) {
        return Err(Error::Usage("structure heights must be non-negative".into()));
    }
    let count = report_count(duration, report_interval)?;
    let elevation = terrain.add(structures)?;
    let mut solver = Solver::new(&elevation, sources, boundary)?;
    solver.run(initial.clone(), count, report_interval)
}

/// One explicit update of at most `dt_max` seconds. Returns the new state and
/// the step actually taken.
pub fn step(
    state: &FlowState,
    elevation: &ScalarField,
    sources: &SourceTerms,
    boundary: Boundary,
    dt_max: f64,
) -> Result<(FlowState, f64)> {
    if elevation.spec() != &state.spec {
        return Err(Error::Usage("state and elevation use different grids".into()));
    }
    if !(dt_max > 0.0) {
        return Err(Error::Usage(format!("dt_max must be positive, got {dt_max}")));
    }
    let mut solver = Solver::new(elevation, sources, boundary)?;
    let mut next = state.clone();
    let taken = solver.advance(&mut next, dt_max)?;
    Ok((next, taken.dt))
}

struct ResolvedInflow {
    cell: usize,
    inflow: PointInflow,
}

struct StepOutcome {
    dt: f64,
    inflow: f64,
    outflow: f64,
}

/// Flux through one face, seen from both adjacent cells. `corr_*` are the
/// hydrostatic pressure corrections added to the normal momentum flux of the
/// lower (`l`) or upper (`r`) cell.
#[derive(Clone, Copy, Default)]
struct FaceFlux {
    mass: f64,
    normal: f64,
    tangential: f64,
    corr_l: f64,
    corr_r: f64,
}

/// Reconstructed state on one side of a face.
#[derive(Clone, Copy, Default)]
struct FaceState {
    h: f64,
    w: f64,
    un: f64,
    ut: f64,
}

struct Solver {
    spec: GridSpec,
    gravity: f64,
    boundary: Boundary,
    friction: Friction,
    elevation: Vec<f64>,
    inflows: Vec<ResolvedInflow>,
    // per-cell scratch
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    east: Vec<FaceState>,
    west: Vec<FaceState>,
    north: Vec<FaceState>,
    south: Vec<FaceState>,
    /// Limited bed slope across each cell, times the cell size.
    bed_x: Vec<f64>,
    bed_y: Vec<f64>,
    drain: Vec<f64>,
    // per-face scratch
    fx: Vec<FaceFlux>,
    fy: Vec<FaceFlux>,
    // stage buffers
    stage: FlowState,
    rhs: [Vec<f64>; 3],
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl Solver {
    fn new(elevation: &ScalarField, sources: &SourceTerms, boundary: Boundary) -> Result<Self> {
        sources.validate()?;
        let spec = *elevation.spec();
        let inflows = sources
            .inflows
            .iter()
            .map(|inflow| {
                let (i, j) = spec.get_index(inflow.x, inflow.y)?;
                Ok(ResolvedInflow {
                    cell: spec.index(i, j),
                    inflow: inflow.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = spec.len();
        let zeros = || vec![0.0; n];
        let faces = || vec![FaceState::default(); n];
        Ok(Self {
            spec,
            gravity: sources.gravity,
            boundary,
            friction: sources.friction,
            elevation: elevation.values().to_vec(),
            inflows,
            u: zeros(),
            v: zeros(),
            w: zeros(),
            east: faces(),
            west: faces(),
            north: faces(),
            south: faces(),
            bed_x: zeros(),
            bed_y: zeros(),
            drain: zeros(),
            fx: vec![FaceFlux::default(); (spec.n_cols + 1) * spec.n_rows],
            fy: vec![FaceFlux::default(); spec.n_cols * (spec.n_rows + 1)],
            stage: FlowState::dry(spec),
            rhs: [zeros(), zeros(), zeros()],
        })
    }

    fn run(
        &mut self,
        mut state: FlowState,
        report_count: usize,
        report_interval: f64,
    ) -> Result<SimulationRecord> {
        state.check_shape()?;
        if !state.is_finite() || state.h.iter().any(|h| *h < 0.0) {
            return Err(Error::Usage("initial state must be finite and non-negative".into()));
        }
        let t0 = state.time;
        let mut max_depth = state.h.clone();
        let mut snapshots = Vec::with_capacity(report_count + 1);
        snapshots.push(state.clone());
        let mut inflow_volume = 0.0;
        let mut outflow_volume = 0.0;
        let mut steps = 0;
        for k in 1..=report_count {
            let target = t0 + k as f64 * report_interval;
            loop {
                let remaining = target - state.time;
                if remaining <= 1e-9 * report_interval {
                    break;
                }
                let outcome = self.advance(&mut state, remaining)?;
                steps += 1;
                inflow_volume += outcome.inflow;
                outflow_volume += outcome.outflow;
                for (m, h) in max_depth.iter_mut().zip(&state.h) {
                    if *h > *m {
                        *m = *h;
                    }
                }
            }
            state.time = target;
            snapshots.push(state.clone());
        }
        Ok(SimulationRecord {
            tf: state.time,
            snapshots,
            max_depth: ScalarField::from_values(self.spec, max_depth)?,
            t0,
            inflow_volume,
            outflow_volume,
            steps,
        })
    }

    fn stable_time_step(&self, state: &FlowState) -> f64 {
        let g = self.gravity;
        let mut speed: f64 = 0.0;
        for ((h, hu), hv) in state.h.iter().zip(&state.hu).zip(&state.hv) {
            if *h >= DRY_DEPTH {
                let inv = 1.0 / h;
                let (u, v) = (hu * inv, hv * inv);
                speed = speed.max((u * u + v * v).sqrt() + (g * h).sqrt());
            }
        }
        if speed > 0.0 {
            CFL * self.spec.cell_size / speed
        } else {
            f64::INFINITY
        }
    }

    /// Advances `state` in place by one Heun step of at most `dt_max`.
    fn advance(&mut self, state: &mut FlowState, dt_max: f64) -> Result<StepOutcome> {
        let time = state.time;
        let stable = self.stable_time_step(state);
        if stable.is_nan() {
            return Err(Error::SolverDivergence {
                time,
                reason: "non-finite wave speed".into(),
            });
        }
        let dt = stable.min(dt_max);
        if dt < MIN_TIME_STEP && dt < dt_max {
            return Err(Error::SolverDivergence {
                time,
                reason: format!("time step collapsed to {dt:e} s"),
            });
        }

        // stage 1: U1 = U + dt L(U)
        let out1 = self.evaluate_rhs(state, dt);
        let mut stage = std::mem::replace(
            &mut self.stage,
            FlowState {
                spec: self.spec,
                h: Vec::new(),
                hu: Vec::new(),
                hv: Vec::new(),
                time,
            },
        );
        stage.time = time + dt;
        for k in 0..state.h.len() {
            stage.h[k] = (state.h[k] + dt * self.rhs[0][k]).max(0.0);
            stage.hu[k] = state.hu[k] + dt * self.rhs[1][k];
            stage.hv[k] = state.hv[k] + dt * self.rhs[2][k];
            if stage.h[k] < DRY_DEPTH {
                stage.hu[k] = 0.0;
                stage.hv[k] = 0.0;
            }
        }
        // stage 2: U_new = (U + U1 + dt L(U1)) / 2
        let out2 = self.evaluate_rhs(&stage, dt);
        for k in 0..state.h.len() {
            let h = 0.5 * (state.h[k] + stage.h[k] + dt * self.rhs[0][k]);
            state.h[k] = h.max(0.0);
            state.hu[k] = 0.5 * (state.hu[k] + stage.hu[k] + dt * self.rhs[1][k]);
            state.hv[k] = 0.5 * (state.hv[k] + stage.hv[k] + dt * self.rhs[2][k]);
        }
        self.stage = stage;
        state.time = time + dt;

        let mut inflow = 0.0;
        let area = self.spec.cell_area();
        for source in &self.inflows {
            let volume = source.inflow.volume_between(time, time + dt);
            if volume != 0.0 {
                state.h[source.cell] = (state.h[source.cell] + volume / area).max(0.0);
                inflow += volume;
            }
        }

        let g = self.gravity;
        let manning = match self.friction {
            Friction::Manning { n } if n > 0.0 => Some(n),
            _ => None,
        };
        for k in 0..state.h.len() {
            let h = state.h[k];
            if h < DRY_DEPTH {
                state.hu[k] = 0.0;
                state.hv[k] = 0.0;
                continue;
            }
            if let Some(n) = manning {
                let speed = state.hu[k].hypot(state.hv[k]) / h;
                let factor = 1.0 + dt * g * n * n * speed / h.powf(4.0 / 3.0);
                state.hu[k] /= factor;
                state.hv[k] /= factor;
            }
        }

        if !state.is_finite() {
            return Err(Error::SolverDivergence {
                time: state.time,
                reason: "non-finite state".into(),
            });
        }
        Ok(StepOutcome {
            dt,
            inflow,
            outflow: 0.5 * dt * (out1 + out2),
        })
    }

    /// Cell velocities and free surface, minmod-limited slopes and the
    /// reconstructed states on the four faces of every cell.
    fn reconstruct(&mut self, state: &FlowState) {
        let Self {
            spec,
            elevation,
            u,
            v,
            w,
            east,
            west,
            north,
            south,
            bed_x,
            bed_y,
            ..
        } = self;
        let (nc, nr) = (spec.n_cols, spec.n_rows);
        let h = &state.h[..];
        for k in 0..h.len() {
            let (a, b) = state.velocity(k);
            u[k] = a;
            v[k] = b;
            w[k] = h[k] + elevation[k];
        }
        let (u, v, w) = (&u[..], &v[..], &w[..]);
        for j in 0..nr {
            let interior_y = j > 0 && j + 1 < nr;
            for i in 0..nc {
                let k = j * nc + i;
                let interior_x = i > 0 && i + 1 < nc;
                let slope = |f: &[f64], step: usize, interior: bool| {
                    if interior {
                        minmod(f[k] - f[k - step], f[k + step] - f[k])
                    } else {
                        0.0
                    }
                };
                let (hx, wx, ux, vx) = (
                    slope(h, 1, interior_x),
                    slope(w, 1, interior_x),
                    slope(u, 1, interior_x),
                    slope(v, 1, interior_x),
                );
                let (hy, wy, uy, vy) = (
                    slope(h, nc, interior_y),
                    slope(w, nc, interior_y),
                    slope(u, nc, interior_y),
                    slope(v, nc, interior_y),
                );
                let (hk, wk, uk, vk) = (h[k], w[k], u[k], v[k]);
                east[k] = FaceState {
                    h: hk + 0.5 * hx,
                    w: wk + 0.5 * wx,
                    un: uk + 0.5 * ux,
                    ut: vk + 0.5 * vx,
                };
                west[k] = FaceState {
                    h: hk - 0.5 * hx,
                    w: wk - 0.5 * wx,
                    un: uk - 0.5 * ux,
                    ut: vk - 0.5 * vx,
                };
                north[k] = FaceState {
                    h: hk + 0.5 * hy,
                    w: wk + 0.5 * wy,
                    un: vk + 0.5 * vy,
                    ut: uk + 0.5 * uy,
                };
                south[k] = FaceState {
                    h: hk - 0.5 * hy,
                    w: wk - 0.5 * wy,
                    un: vk - 0.5 * vy,
                    ut: uk - 0.5 * uy,
                };
                bed_x[k] = wx - hx;
                bed_y[k] = wy - hy;
            }
        }
    }

    /// Fills `self.rhs` with the semi-discrete tendency of `state`, limited so
    /// that a forward-Euler step of `dt` keeps depths non-negative. Returns the
    /// boundary outflow rate in m³/s.
    fn evaluate_rhs(&mut self, state: &FlowState, dt: f64) -> f64 {
        self.reconstruct(state);
        let Self {
            spec,
            gravity,
            boundary,
            east,
            west,
            north,
            south,
            bed_x,
            bed_y,
            drain,
            fx,
            fy,
            rhs,
            ..
        } = self;
        let (nc, nr) = (spec.n_cols, spec.n_rows);
        let dx = spec.cell_size;
        let (g, boundary) = (*gravity, *boundary);
        let h = &state.h[..];

        // x faces: face i of row j sits between cells i-1 and i
        for j in 0..nr {
            let cells = j * nc..(j + 1) * nc;
            let (depth, e, wst) = (&h[cells.clone()], &east[cells.clone()], &west[cells]);
            let faces = &mut fx[j * (nc + 1)..(j + 1) * (nc + 1)];
            faces[0] = boundary_flux(g, boundary, wst[0], false);
            faces[nc] = boundary_flux(g, boundary, e[nc - 1], true);
            for i in 1..nc {
                faces[i] = if depth[i - 1] == 0.0 && depth[i] == 0.0 {
                    FaceFlux::default()
                } else {
                    interior_flux(g, e[i - 1], wst[i])
                };
            }
        }
        // y faces: face j of column i sits between cells (i, j-1) and (i, j)
        for i in 0..nc {
            fy[i] = boundary_flux(g, boundary, south[i], false);
            fy[nr * nc + i] = boundary_flux(g, boundary, north[(nr - 1) * nc + i], true);
        }
        for j in 1..nr {
            let (below, above) = ((j - 1) * nc..j * nc, j * nc..(j + 1) * nc);
            let (hb, ha) = (&h[below.clone()], &h[above.clone()]);
            let (n, s) = (&north[below], &south[above]);
            let faces = &mut fy[j * nc..(j + 1) * nc];
            for i in 0..nc {
                faces[i] = if hb[i] == 0.0 && ha[i] == 0.0 {
                    FaceFlux::default()
                } else {
                    interior_flux(g, n[i], s[i])
                };
            }
        }

        // outgoing mass per cell over dt, then the drain factor
        drain.fill(0.0);
        for j in 0..nr {
            let faces = &fx[j * (nc + 1)..(j + 1) * (nc + 1)];
            let d = &mut drain[j * nc..(j + 1) * nc];
            for (i, f) in faces.iter().enumerate() {
                if f.mass > 0.0 && i > 0 {
                    d[i - 1] += f.mass;
                } else if f.mass < 0.0 && i < nc {
                    d[i] -= f.mass;
                }
            }
        }
        for j in 0..=nr {
            let faces = &fy[j * nc..(j + 1) * nc];
            for (i, f) in faces.iter().enumerate() {
                if f.mass > 0.0 && j > 0 {
                    drain[(j - 1) * nc + i] += f.mass;
                } else if f.mass < 0.0 && j < nr {
                    drain[j * nc + i] -= f.mass;
                }
            }
        }
        let ratio = dt / dx;
        for (d, depth) in drain.iter_mut().zip(h) {
            let out = *d * ratio;
            *d = if out > *depth { depth / out } else { 1.0 };
        }

        let [dh, dhu, dhv] = rhs;
        dh.fill(0.0);
        dhu.fill(0.0);
        dhv.fill(0.0);
        let mut outflow = 0.0;
        for j in 0..nr {
            let row = j * nc;
            let faces = &fx[j * (nc + 1)..(j + 1) * (nc + 1)];
            for (i, f) in faces.iter().enumerate() {
                let scale = if f.mass > 0.0 && i > 0 {
                    drain[row + i - 1]
                } else if f.mass < 0.0 && i < nc {
                    drain[row + i]
                } else {
                    1.0
                };
                let (m, fu, fv) = (scale * f.mass, scale * f.normal, scale * f.tangential);
                if i > 0 {
                    let l = row + i - 1;
                    dh[l] -= m;
                    dhu[l] -= fu + f.corr_l;
                    dhv[l] -= fv;
                } else {
                    outflow -= m;
                }
                if i < nc {
                    let r = row + i;
                    dh[r] += m;
                    dhu[r] += fu + f.corr_r;
                    dhv[r] += fv;
                } else {
                    outflow += m;
                }
            }
        }
        for j in 0..=nr {
            let faces = &fy[j * nc..(j + 1) * nc];
            for (i, f) in faces.iter().enumerate() {
                let scale = if f.mass > 0.0 && j > 0 {
                    drain[(j - 1) * nc + i]
                } else if f.mass < 0.0 && j < nr {
                    drain[j * nc + i]
                } else {
                    1.0
                };
                let (m, fv, fu) = (scale * f.mass, scale * f.normal, scale * f.tangential);
                if j > 0 {
                    let l = (j - 1) * nc + i;
                    dh[l] -= m;
                    dhv[l] -= fv + f.corr_l;
                    dhu[l] -= fu;
                } else {
                    outflow -= m;
                }
                if j < nr {
                    let r = j * nc + i;
                    dh[r] += m;
                    dhv[r] += fv + f.corr_r;
                    dhu[r] += fu;
                } else {
                    outflow += m;
                }
            }
        }
        // centred bed-slope source: -g h dB per cell
        let inv = 1.0 / dx;
        for k in 0..h.len() {
            if h[k] != 0.0 {
                dhu[k] -= g * h[k] * bed_x[k];
                dhv[k] -= g * h[k] * bed_y[k];
            }
            dh[k] *= inv;
            dhu[k] *= inv;
            dhv[k] *= inv;
        }
        outflow * dx
    }
}

/// Flux through a domain-boundary face given the interior face state.
/// `outward_positive` is true on the east/north boundaries.
fn boundary_flux(g: f64, boundary: Boundary, inner: FaceState, outward_positive: bool) -> FaceFlux {
    if inner.h <= 0.0 {
        return FaceFlux::default();
    }
    match boundary {
        Boundary::Reflective => {
            let mut ghost = inner;
            ghost.un = -inner.un;
            if outward_positive {
                interior_flux(g, inner, ghost)
            } else {
                interior_flux(g, ghost, inner)
            }
        }
        Boundary::CriticalDepth => {
            let outward = if outward_positive { inner.un } else { -inner.un };
            let h = inner.h;
            if outward > 0.0 {
                let q = h * inner.un;
                FaceFlux {
                    mass: q,
                    normal: q * inner.un + 0.5 * g * h * h,
                    tangential: q * inner.ut,
                    corr_l: 0.0,
                    corr_r: 0.0,
                }
            } else {
                FaceFlux {
                    normal: 0.5 * g * h * h,
                    ..FaceFlux::default()
                }
            }
        }
    }
}

/// Central-upwind flux between two reconstructed states with hydrostatic
/// reconstruction of the depths against the higher of the two face beds.
#[inline]
fn interior_flux(g: f64, left: FaceState, right: FaceState) -> FaceFlux {
    let bed_l = left.w - left.h;
    let bed_r = right.w - right.h;
    let h_l = left.h.max(0.0);
    let h_r = right.h.max(0.0);
    let hs_l = (h_l - (bed_r - bed_l).max(0.0)).max(0.0);
    let hs_r = (h_r - (bed_l - bed_r).max(0.0)).max(0.0);
    let corr_l = 0.5 * g * (h_l * h_l - hs_l * hs_l);
    let corr_r = 0.5 * g * (h_r * h_r - hs_r * hs_r);

    let (un_l, ut_l) = if hs_l > 0.0 { (left.un, left.ut) } else { (0.0, 0.0) };
    let (un_r, ut_r) = if hs_r > 0.0 { (right.un, right.ut) } else { (0.0, 0.0) };
    let c_l = (g * hs_l).sqrt();
    let c_r = (g * hs_r).sqrt();
    let a_plus = (un_l + c_l).max(un_r + c_r).max(0.0);
    let a_minus = (un_l - c_l).min(un_r - c_r).min(0.0);
    let spread = a_plus - a_minus;
    if spread <= 1e-14 {
        return FaceFlux {
            corr_l,
            corr_r,
            ..FaceFlux::default()
        };
    }
    let q_l = hs_l * un_l;
    let q_r = hs_r * un_r;
    let p_l = 0.5 * g * hs_l * hs_l;
    let p_r = 0.5 * g * hs_r * hs_r;
    let prod = a_plus * a_minus;
    let inv = 1.0 / spread;
    let mass = (a_plus * q_l - a_minus * q_r + prod * (hs_r - hs_l)) * inv;
    let normal = (a_plus * (q_l * un_l + p_l) - a_minus * (q_r * un_r + p_r)
        + prod * (q_r - q_l))
        * inv;
    let tangential = (a_plus * q_l * ut_l - a_minus * q_r * ut_r
        + prod * (hs_r * ut_r - hs_l * ut_l))
        * inv;
    FaceFlux {
        mass,
        normal,
        tangential,
        corr_l,
        corr_r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n_cols: usize, n_rows: usize) -> GridSpec {
        GridSpec::new(n_cols, n_rows, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn minmod_picks_smaller_same_sign() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-3.0, -2.0), -2.0);
        assert_eq!(minmod(1.0, -1.0), 0.0);
        assert_eq!(minmod(0.0, 5.0), 0.0);
    }

    #[test]
    fn hydrograph_volume_integrates_steps() {
        let inflow = PointInflow {
            x: 0.5,
            y: 0.5,
            hydrograph: vec![(1.0, 2.0), (3.0, 0.5)],
        };
        assert_eq!(inflow.volume_between(0.0, 1.0), 0.0);
        assert_eq!(inflow.volume_between(0.0, 2.0), 2.0);
        assert_eq!(inflow.volume_between(2.0, 5.0), 2.0 + 1.0);
        assert_eq!(inflow.volume_between(10.0, 12.0), 1.0);
    }

    #[test]
    fn nearest_snapshot_breaks_ties_downwards() {
        let s = spec(2, 2);
        let snapshots = (0..4)
            .map(|k| FlowState {
                time: k as f64,
                ..FlowState::dry(s)
            })
            .collect();
        let record = SimulationRecord {
            snapshots,
            max_depth: ScalarField::zeros(s),
            t0: 0.0,
            tf: 3.0,
            inflow_volume: 0.0,
            outflow_volume: 0.0,
            steps: 0,
        };
        assert_eq!(record.nearest_snapshot(-1.0), 0);
        assert_eq!(record.nearest_snapshot(1.4), 1);
        assert_eq!(record.nearest_snapshot(1.5), 1);
        assert_eq!(record.nearest_snapshot(1.6), 2);
        assert_eq!(record.nearest_snapshot(9.0), 3);
    }

    #[test]
    fn dry_domain_step_is_identity() {
        let s = spec(8, 8);
        let state = FlowState::dry(s);
        let bed = ScalarField::from_fn(s, |x, _| x * 0.1);
        let (next, dt) =
            step(&state, &bed, &SourceTerms::default(), Boundary::CriticalDepth, 0.7).unwrap();
        assert_eq!(dt, 0.7);
        assert_eq!(next.h, state.h);
        assert_eq!(next.hu, state.hu);
        assert_eq!(next.hv, state.hv);
    }

    #[test]
    fn submerged_step_stays_at_rest_after_one_step() {
        let s = spec(16, 16);
        let bed = ScalarField::from_fn(s, |x, y| if x > 8.0 && y > 5.0 { 0.6 } else { 0.0 });
        let depth = ScalarField::from_fn(s, |x, y| 1.0 - if x > 8.0 && y > 5.0 { 0.6 } else { 0.0 });
        let state = FlowState::at_rest(&depth).unwrap();
        let (next, dt) =
            step(&state, &bed, &SourceTerms::default(), Boundary::CriticalDepth, 1.0).unwrap();
        assert!(dt > 0.0 && dt < 1.0);
        for k in 0..s.len() {
            assert!(next.hu[k].abs() <= 1e-10, "hu = {}", next.hu[k]);
            assert!(next.hv[k].abs() <= 1e-10, "hv = {}", next.hv[k]);
        }
    }

    #[test]
    fn single_column_spreads_symmetrically() {
        let s = spec(9, 9);
        let mut depth = ScalarField::zeros(s);
        depth.set(4, 4, 1.0);
        let state = FlowState::at_rest(&depth).unwrap();
        let bed = ScalarField::zeros(s);
        let (next, _) =
            step(&state, &bed, &SourceTerms::default(), Boundary::CriticalDepth, 1.0).unwrap();
        // reflect the inputs: the transposed run must equal the transposed output
        for j in 0..9 {
            for i in 0..9 {
                let a = next.h[s.index(i, j)];
                let b = next.h[s.index(j, i)];
                assert!((a - b).abs() <= 1e-15, "({i},{j}): {a} vs {b}");
                assert!(a >= 0.0);
            }
        }
        assert!(next.h[s.index(4, 4)] < 1.0);
        assert!(next.h[s.index(3, 4)] > 0.0);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = ScalarField::zeros(spec(4, 4));
        let b = ScalarField::zeros(spec(5, 4));
        let state = FlowState::dry(spec(4, 4));
        let err = simulate(&a, &b, &state, &SourceTerms::default(), Boundary::CriticalDepth, 1.0, 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn report_interval_must_divide_duration() {
        assert_eq!(report_count(100.0, 1.0).unwrap(), 100);
        assert_eq!(report_count(1.0, 0.1).unwrap(), 10);
        assert!(report_count(10.0, 3.0).is_err());
        assert!(report_count(0.0, 1.0).is_err());
        assert!(report_count(1.0, -1.0).is_err());
    }

    #[test]
    fn snapshots_are_at_report_times() {
        let s = spec(8, 8);
        let bed = ScalarField::zeros(s);
        let depth = ScalarField::from_fn(s, |x, _| if x < 4.0 { 1.0 } else { 0.0 });
        let state = FlowState::at_rest(&depth).unwrap();
        let record = simulate(
            &bed,
            &ScalarField::zeros(s),
            &state,
            &SourceTerms::default(),
            Boundary::CriticalDepth,
            2.0,
            0.5,
        )
        .unwrap();
        let times: Vec<f64> = record.timestamps().collect();
        assert_eq!(times, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(record.t0, 0.0);
        assert_eq!(record.tf, 2.0);
        for snap in &record.snapshots {
            for (m, h) in record.max_depth.values().iter().zip(&snap.h) {
                assert!(m >= h);
            }
        }
    }

    #[test]
    fn point_inflow_adds_its_volume() {
        let s = spec(10, 10);
        let bed = ScalarField::zeros(s);
        let sources = SourceTerms {
            inflows: vec![PointInflow {
                x: 5.5,
                y: 5.5,
                hydrograph: vec![(0.0, 2.0), (1.0, 0.0)],
            }],
            ..SourceTerms::default()
        };
        let record = simulate(
            &bed,
            &ScalarField::zeros(s),
            &FlowState::dry(s),
            &sources,
            Boundary::Reflective,
            2.0,
            1.0,
        )
        .unwrap();
        let last = record.snapshots.last().unwrap();
        assert!((record.inflow_volume - 2.0).abs() < 1e-12);
        assert!((last.volume() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn manning_friction_slows_flow() {
        let s = spec(20, 4);
        let bed = ScalarField::zeros(s);
        let depth = ScalarField::from_fn(s, |x, _| if x < 10.0 { 1.0 } else { 0.2 });
        let state = FlowState::at_rest(&depth).unwrap();
        let run = |friction| {
            let sources = SourceTerms {
                friction,
                ..SourceTerms::default()
            };
            simulate(&bed, &ScalarField::zeros(s), &state, &sources, Boundary::Reflective, 2.0, 2.0)
                .unwrap()
        };
        let free = run(Friction::Frictionless);
        let rough = run(Friction::Manning { n: 0.1 });
        let momentum = |r: &SimulationRecord| {
            r.snapshots.last().unwrap().hu.iter().map(|q| q.abs()).sum::<f64>()
        };
        assert!(momentum(&rough) < momentum(&free));
    }
}
