//! Penalised flood objective: flooded asset volume plus feasibility penalties.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AssetPolygon, Region};
use crate::grid::{GridSpec, ScalarField};
use crate::scenario_io::Scenario;
use crate::structures::{integrate_over, wall_asset_volume, Configuration};
use crate::swe::SimulationRecord;

/// Weights that turn constraint violations into objective units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    /// Per cubic metre of wall standing on assets.
    pub overlap: f64,
    /// Per metre of centroid distance outside the search region.
    pub distance: f64,
}

impl PenaltyWeights {
    /// `1 / cell_size^2` for overlap and one for distance.
    pub fn for_grid(grid: &GridSpec) -> Self {
        Self {
            overlap: grid.cell_size.powi(-2),
            distance: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.overlap >= 0.0 && self.distance >= 0.0) {
            return Err(Error::Usage("penalty weights must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub flood_volume: f64,
    pub overlap_penalty: f64,
    pub distance_penalty: f64,
    pub total: f64,
    pub feasible: bool,
}

impl ObjectiveBreakdown {
    pub fn new(flood_volume: f64, overlap_penalty: f64, distance_penalty: f64) -> Self {
        Self {
            flood_volume,
            overlap_penalty,
            distance_penalty,
            total: flood_volume + overlap_penalty + distance_penalty,
            feasible: overlap_penalty == 0.0 && distance_penalty == 0.0,
        }
    }
}

/// Maximum depth integrated over every asset by cell-centre sampling.
pub fn flood_volume(max_depth: &ScalarField, assets: &[AssetPolygon]) -> f64 {
    assets.iter().map(|a| integrate_over(max_depth, a)).sum()
}

/// `(overlap, distance)` penalty terms of a configuration.
pub fn penalty(
    config: &Configuration,
    assets: &[AssetPolygon],
    region: &Region,
    weights: &PenaltyWeights,
    grid: &GridSpec,
) -> (f64, f64) {
    let overlap = weights.overlap * wall_asset_volume(config, assets, grid);
    let distance: f64 = config
        .walls
        .iter()
        .map(|w| region.distance(w.centroid()))
        .sum();
    let distance = if distance == 0.0 || weights.distance == 0.0 {
        0.0
    } else {
        weights.distance * distance
    };
    (overlap, distance)
}

/// Objective evaluation against one scenario, holding the unmitigated run.
///
/// Feasible configurations are simulated. Infeasible ones are charged the
/// unmitigated flood volume plus their penalty without a new simulation.
#[derive(Debug)]
pub struct Evaluator<'a> {
    scenario: &'a Scenario,
    weights: PenaltyWeights,
    baseline: SimulationRecord,
    baseline_volume: f64,
    solves: AtomicUsize,
}

impl<'a> Evaluator<'a> {
    /// Runs the unmitigated simulation once.
    pub fn new(scenario: &'a Scenario, weights: PenaltyWeights) -> Result<Self> {
        let baseline = scenario.simulate(&ScalarField::zeros(*scenario.grid()))?;
        Self::with_baseline(scenario, weights, baseline)
    }

    pub fn with_baseline(
        scenario: &'a Scenario,
        weights: PenaltyWeights,
        baseline: SimulationRecord,
    ) -> Result<Self> {
        weights.validate()?;
        if baseline.spec() != scenario.grid() {
            return Err(Error::Usage("baseline record uses a different grid".into()));
        }
        let baseline_volume = flood_volume(&baseline.max_depth, &scenario.assets);
        Ok(Self {
            scenario,
            weights,
            baseline,
            baseline_volume,
            solves: AtomicUsize::new(0),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn weights(&self) -> &PenaltyWeights {
        &self.weights
    }

    pub fn baseline(&self) -> &SimulationRecord {
        &self.baseline
    }

    pub fn baseline_volume(&self) -> f64 {
        self.baseline_volume
    }

    /// Objective of the do-nothing configuration.
    pub fn baseline_objective(&self) -> ObjectiveBreakdown {
        ObjectiveBreakdown::new(self.baseline_volume, 0.0, 0.0)
    }

    /// Simulations run by [`Evaluator::evaluate`] so far.
    pub fn solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn evaluate(
        &self,
        config: &Configuration,
        region: &Region,
    ) -> Result<(ObjectiveBreakdown, Option<SimulationRecord>)> {
        let grid = self.scenario.grid();
        let (overlap, distance) =
            penalty(config, &self.scenario.assets, region, &self.weights, grid);
        if overlap > 0.0 || distance > 0.0 {
            let objective = ObjectiveBreakdown::new(self.baseline_volume, overlap, distance);
            return Ok((objective, None));
        }
        if config.is_empty() {
            return Ok((self.baseline_objective(), None));
        }
        self.solves.fetch_add(1, Ordering::Relaxed);
        let record = self
            .scenario
            .simulate_configuration(config)
            .map_err(|e| Error::ConfigurationDivergence {
                configuration: config.to_string(),
                source: Box::new(e),
            })?;
        let volume = flood_volume(&record.max_depth, &self.scenario.assets);
        Ok((ObjectiveBreakdown::new(volume, 0.0, 0.0), Some(record)))
    }
}
