//! Budgeted search for wall placements: restricted search regions from
//! pathtubes, batch evaluation of differential-evolution candidates and the
//! one-wall-at-a-time sequential variant.

mod de;

pub use de::{
    latin_hypercube, reflect_angle, Bounds, CandidateGenerator, DifferentialEvolution,
};

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{alpha_shape, AssetPolygon, Region};
use crate::grid::{GridSpec, ScalarField};
use crate::objective::{Evaluator, ObjectiveBreakdown, PenaltyWeights};
use crate::pathline::{pathtube_points, PathlineConfig};
use crate::scenario_io::Scenario;
use crate::structures::{Configuration, WallParams, WallSpec};
use crate::swe::SimulationRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Centroids anywhere in the domain.
    Direct,
    /// Centroids penalised outside the pathtube region.
    Pathline,
}

/// Stopping rule. Evaluations count every candidate, simulated or not; the
/// time limit is checked between batches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBudget {
    pub max_evaluations: Option<usize>,
    pub time_limit: Option<Duration>,
}

impl SearchBudget {
    pub fn evaluations(count: usize) -> Self {
        Self {
            max_evaluations: Some(count),
            time_limit: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.max_evaluations, self.time_limit) {
            (None, None) => Err(Error::Usage(
                "set an evaluation limit, a time limit or both".into(),
            )),
            (_, Some(t)) if t.is_zero() => Err(Error::Usage("time limit must be positive".into())),
            _ => Ok(()),
        }
    }

    /// Equal share of the budget for one of `parts` stages.
    fn share(&self, parts: usize) -> Self {
        Self {
            max_evaluations: self.max_evaluations.map(|m| m / parts),
            time_limit: self.time_limit.map(|t| t / parts as u32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    /// Population is this many members per wall.
    pub population_factor: usize,
    /// Range of the per-generation mutation factor.
    pub mutation: (f64, f64),
    pub recombination: f64,
    pub seed: u64,
    /// Threads used for concurrent evaluation. Results do not depend on it.
    pub workers: usize,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population_factor: 45,
            mutation: (0.5, 1.0),
            recombination: 0.9,
            seed: 0,
            workers: 1,
        }
    }
}

impl DeConfig {
    pub fn validate(&self, walls: usize) -> Result<()> {
        if self.population_factor * walls < 4 {
            return Err(Error::Usage("population must have at least 4 members".into()));
        }
        let (lo, hi) = self.mutation;
        if !(lo > 0.0 && lo < hi && hi < 2.0) {
            return Err(Error::Usage(format!(
                "mutation range ({lo}, {hi}) must lie inside (0, 2)"
            )));
        }
        if !(self.recombination > 0.0 && self.recombination <= 1.0) {
            return Err(Error::Usage("recombination must be in (0, 1]".into()));
        }
        if self.workers == 0 {
            return Err(Error::Usage("need at least one worker".into()));
        }
        Ok(())
    }
}

/// One evaluated candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// 1-based position in the evaluation sequence.
    pub index: usize,
    pub config: Configuration,
    pub objective: ObjectiveBreakdown,
    /// Best total after this evaluation.
    pub best_total: f64,
}

/// Outcome of one stage of a sequential run.
#[derive(Debug, Clone, PartialEq)]
pub struct StageResult {
    /// The stage's wall, or no wall if nothing beat the stage baseline.
    pub config: Configuration,
    pub objective: ObjectiveBreakdown,
    pub evaluations: usize,
    /// Length of the stage's restriction trace.
    pub restriction_trace_len: usize,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub best_config: Configuration,
    pub best_objective: ObjectiveBreakdown,
    /// Terrain with the best walls added.
    pub best_elevation: ScalarField,
    pub unmitigated: ObjectiveBreakdown,
    pub history: Vec<Evaluation>,
    /// The search region at the start and after each update.
    pub restriction_trace: Vec<Region>,
    pub pde_solves: usize,
    /// Per-stage results of a sequential run, empty otherwise.
    pub stages: Vec<StageResult>,
}

/// Default alpha-shape radius: `5 (dx + dy) / 2`.
pub fn default_alpha(grid: &GridSpec) -> f64 {
    crate::pathline::default_alpha(grid)
}

/// Region covered by the alpha shapes of every asset's pathtube, minus the
/// assets themselves.
pub fn restriction_from_record(
    record: &SimulationRecord,
    assets: &[AssetPolygon],
    alpha: f64,
) -> Result<Region> {
    let config = PathlineConfig::for_grid(record.spec()).with_jump_guard(alpha);
    let mut region = Region::empty();
    for asset in assets {
        let points = pathtube_points(record, &asset.exterior, &config)?;
        region = region.union(&alpha_shape(&points, alpha));
    }
    Ok(region.subtract_assets(assets))
}

/// Runs the unmitigated scenario and builds the initial pathtube region.
pub fn initialize_restriction(scenario: &Scenario, alpha: f64) -> Result<(Region, SimulationRecord)> {
    let record = scenario.simulate(&ScalarField::zeros(*scenario.grid()))?;
    let region = restriction_from_record(&record, &scenario.assets, alpha)?;
    Ok((region, record))
}

/// `current` grown by the pathtube region of `record`.
pub fn update_restriction(
    record: &SimulationRecord,
    assets: &[AssetPolygon],
    current: &Region,
    alpha: f64,
) -> Result<Region> {
    Ok(current.union(&restriction_from_record(record, assets, alpha)?))
}

/// Search box for `walls` walls: centroids over the domain, angles on `[0, pi]`.
pub fn wall_bounds(grid: &GridSpec, walls: usize) -> Bounds {
    let mut b = Bounds {
        lower: Vec::new(),
        upper: Vec::new(),
        angular: Vec::new(),
    };
    for _ in 0..walls {
        b.lower.extend([grid.origin_x, grid.origin_y, 0.0]);
        b.upper.extend([grid.x_max(), grid.y_max(), PI]);
        b.angular.extend([false, false, true]);
    }
    b
}

pub fn decode(v: &[f64], spec: WallSpec) -> Configuration {
    Configuration::new(
        v.chunks_exact(3)
            .map(|c| WallParams::new(c[0], c[1], c[2]))
            .collect(),
        spec,
    )
}

/// Centroids drawn uniformly from `region`, angles uniformly from `[0, pi]`.
fn sample_population(
    region: &Region,
    walls: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let centroids = region.sample_uniform(rng, walls * count)?;
    Ok(centroids
        .chunks_exact(walls)
        .map(|cs| {
            cs.iter()
                .flat_map(|p| [p.x, p.y, rng.gen_range(0.0..=PI)])
                .collect()
        })
        .collect())
}

struct Settings {
    walls: usize,
    budget: SearchBudget,
    mode: Mode,
    de: DeConfig,
    alpha: f64,
    update_restriction: bool,
}

/// Searches `walls` wall placements for `scenario` within `budget`.
pub fn solve_ofmp(
    scenario: &Scenario,
    walls: usize,
    budget: &SearchBudget,
    mode: Mode,
    de: &DeConfig,
    alpha: f64,
) -> Result<SolveResult> {
    solve(
        scenario,
        &Settings {
            walls,
            budget: *budget,
            mode,
            de: *de,
            alpha,
            update_restriction: true,
        },
    )
}

fn solve(scenario: &Scenario, s: &Settings) -> Result<SolveResult> {
    if s.walls == 0 {
        return Err(Error::Usage("need at least one wall".into()));
    }
    s.budget.validate()?;
    s.de.validate(s.walls)?;
    if !(s.alpha > 0.0 && s.alpha.is_finite()) {
        return Err(Error::Usage(format!("alpha must be positive, got {}", s.alpha)));
    }
    scenario.validate()?;
    let started = Instant::now();
    let grid = *scenario.grid();
    let evaluator = Evaluator::new(scenario, PenaltyWeights::for_grid(&grid))?;

    let mut region = match s.mode {
        Mode::Direct => Region::all_plane(),
        Mode::Pathline => restriction_from_record(evaluator.baseline(), &scenario.assets, s.alpha)?,
    };
    let bounds = wall_bounds(&grid, s.walls);
    let mut rng = ChaCha8Rng::seed_from_u64(s.de.seed);
    let pop = s.de.population_factor * s.walls;
    let initial = match s.mode {
        Mode::Direct => latin_hypercube(&bounds, pop, &mut rng),
        // a region that cannot be sampled falls back to the full box
        Mode::Pathline => sample_population(&region, s.walls, pop, &mut rng)
            .unwrap_or_else(|_| latin_hypercube(&bounds, pop, &mut rng)),
    };
    let mut generator =
        DifferentialEvolution::new(bounds, initial, s.de.mutation, s.de.recombination);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.de.workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;

    let unmitigated = evaluator.baseline_objective();
    let mut best = unmitigated;
    let mut best_config = Configuration::empty(scenario.wall_spec);
    let mut history: Vec<Evaluation> = Vec::new();
    let mut trace = vec![region.clone()];
    let grows = s.mode == Mode::Pathline && s.update_restriction;

    loop {
        let remaining = s.budget.max_evaluations.map(|m| m.saturating_sub(history.len()));
        let out_of_time = s.budget.time_limit.is_some_and(|t| started.elapsed() >= t);
        if remaining == Some(0) || out_of_time {
            break;
        }
        let mut batch = generator.propose(&mut rng);
        if let Some(r) = remaining {
            batch.truncate(r);
        }
        let configs: Vec<Configuration> =
            batch.iter().map(|v| decode(v, scenario.wall_spec)).collect();
        let threshold = best.total;
        let current = &region;
        let outcomes: Vec<Result<(ObjectiveBreakdown, Option<Region>)>> = pool.install(|| {
            configs
                .par_iter()
                .map(|config| {
                    let (objective, record) = evaluator.evaluate(config, current)?;
                    let grown = match record {
                        Some(rec) if grows && objective.total < threshold => Some(
                            restriction_from_record(&rec, &scenario.assets, s.alpha)?,
                        ),
                        _ => None,
                    };
                    Ok((objective, grown))
                })
                .collect()
        });

        let mut totals = Vec::with_capacity(configs.len());
        let mut next_region = None::<Region>;
        for (config, outcome) in configs.into_iter().zip(outcomes) {
            let (objective, grown) = outcome?;
            if objective.total < best.total {
                best = objective;
                best_config = config.clone();
                if let Some(piece) = grown {
                    let base = next_region.as_ref().unwrap_or(&region);
                    let updated = base.union(&piece);
                    trace.push(updated.clone());
                    next_region = Some(updated);
                }
            }
            totals.push(objective.total);
            history.push(Evaluation {
                index: history.len() + 1,
                config,
                objective,
                best_total: best.total,
            });
        }
        if let Some(r) = next_region {
            region = r;
        }
        generator.observe(&totals);
    }

    Ok(SolveResult {
        best_elevation: scenario.elevation_with(&best_config),
        best_config,
        best_objective: best,
        unmitigated,
        history,
        restriction_trace: trace,
        pde_solves: evaluator.solves(),
        stages: Vec::new(),
    })
}

/// Places walls one at a time. Stage `k` optimises a single wall on the
/// terrain left by the earlier stages, with `1 / walls` of the budget, seed
/// `de.seed + k` and no restriction updates.
pub fn solve_sequential(
    scenario: &Scenario,
    walls: usize,
    budget: &SearchBudget,
    mode: Mode,
    de: &DeConfig,
    alpha: f64,
) -> Result<SolveResult> {
    if walls == 0 {
        return Err(Error::Usage("need at least one wall".into()));
    }
    budget.validate()?;
    let share = budget.share(walls);
    let mut current = scenario.clone();
    let mut placed = Vec::new();
    let mut history: Vec<Evaluation> = Vec::new();
    let mut trace = Vec::new();
    let mut stages = Vec::new();
    let mut pde_solves = 0;
    let mut unmitigated = None;
    let mut best = None;

    for stage in 0..walls {
        let stage_de = DeConfig {
            seed: de.seed.wrapping_add(stage as u64),
            ..*de
        };
        let r = solve(
            &current,
            &Settings {
                walls: 1,
                budget: share,
                mode,
                de: stage_de,
                alpha,
                update_restriction: false,
            },
        )?;
        let offset = history.len();
        history.extend(r.history.into_iter().map(|e| Evaluation {
            index: e.index + offset,
            ..e
        }));
        trace.extend(r.restriction_trace.iter().cloned());
        pde_solves += r.pde_solves;
        unmitigated.get_or_insert(r.unmitigated);
        stages.push(StageResult {
            config: r.best_config.clone(),
            objective: r.best_objective,
            evaluations: history.len() - offset,
            restriction_trace_len: r.restriction_trace.len(),
        });
        if let Some(wall) = r.best_config.walls.first() {
            placed.push(*wall);
            current = current.with_terrain(r.best_elevation)?;
        }
        best = Some(r.best_objective);
    }

    Ok(SolveResult {
        best_config: Configuration::new(placed, scenario.wall_spec),
        best_objective: best.expect("at least one stage"),
        best_elevation: current.terrain,
        unmitigated: unmitigated.expect("at least one stage"),
        history,
        restriction_trace: trace,
        pde_solves,
        stages,
    })
}
