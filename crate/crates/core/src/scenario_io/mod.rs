//! Scenario definition, manifest and raster files, built-in fixtures and
//! result outputs.

mod ascii;
mod fixtures;
mod manifest;
mod outputs;

pub use ascii::{format_raster, parse_raster, read_raster, write_raster};
pub use fixtures::{builtin_scenario, BUILTIN_COUNT};
pub use manifest::{load_scenario, save_scenario};
pub use outputs::{
    write_configuration_csv, write_convergence_csv, write_pathlines_csv, write_region_exteriors,
    CONVERGENCE_HEADER,
};

use crate::error::{Error, Result};
use crate::geometry::AssetPolygon;
use crate::grid::{GridSpec, ScalarField};
use crate::structures::{rasterize_configuration, Configuration, WallSpec};
use crate::swe::{self, Boundary, FlowState, SimulationRecord, SourceTerms};

/// A flood problem: terrain, initial water, sources, assets and wall size.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub terrain: ScalarField,
    pub initial_depth: ScalarField,
    pub assets: Vec<AssetPolygon>,
    pub sources: SourceTerms,
    pub boundary: Boundary,
    pub duration: f64,
    pub report_interval: f64,
    pub wall_spec: WallSpec,
}

impl Scenario {
    pub fn grid(&self) -> &GridSpec {
        self.terrain.spec()
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid();
        if self.initial_depth.spec() != grid {
            return Err(Error::Validation(
                "initial_depth raster does not match the terrain grid".into(),
            ));
        }
        if self.terrain.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("terrain has non-finite values".into()));
        }
        if self
            .initial_depth
            .values()
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::Validation(
                "initial_depth must be finite and non-negative".into(),
            ));
        }
        if self.assets.is_empty() {
            return Err(Error::Validation("scenario has no assets".into()));
        }
        for asset in &self.assets {
            asset.validate()?;
            if let Some(p) = asset.exterior.iter().find(|p| !grid.contains(p.x, p.y)) {
                return Err(Error::Validation(format!(
                    "asset '{}' has vertex ({}, {}) outside the domain",
                    asset.name, p.x, p.y
                )));
            }
        }
        self.sources.validate()?;
        for inflow in &self.sources.inflows {
            if !grid.contains(inflow.x, inflow.y) {
                return Err(Error::Validation(format!(
                    "inflow at ({}, {}) outside the domain",
                    inflow.x, inflow.y
                )));
            }
        }
        self.wall_spec.validate()?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Validation("duration must be positive".into()));
        }
        if !(self.report_interval > 0.0 && self.report_interval.is_finite()) {
            return Err(Error::Validation("report_interval must be positive".into()));
        }
        let ratio = self.duration / self.report_interval;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return Err(Error::Validation(format!(
                "duration {} is not a multiple of report_interval {}",
                self.duration, self.report_interval
            )));
        }
        Ok(())
    }

    /// Runs the flow solver with `structures` added to the terrain.
    pub fn simulate(&self, structures: &ScalarField) -> Result<SimulationRecord> {
        let initial = FlowState::at_rest(&self.initial_depth)?;
        swe::simulate(
            &self.terrain,
            structures,
            &initial,
            &self.sources,
            self.boundary,
            self.duration,
            self.report_interval,
        )
    }

    pub fn simulate_configuration(&self, config: &Configuration) -> Result<SimulationRecord> {
        self.simulate(&rasterize_configuration(config, self.grid()))
    }

    /// Terrain with the walls of `config` added.
    pub fn elevation_with(&self, config: &Configuration) -> ScalarField {
        let walls = rasterize_configuration(config, self.grid());
        self.terrain
            .add(&walls)
            .expect("structure field shares the terrain grid")
    }

    /// Copy of the scenario on a different terrain of the same grid.
    pub fn with_terrain(&self, terrain: ScalarField) -> Result<Scenario> {
        if terrain.spec() != self.grid() {
            return Err(Error::Usage("replacement terrain uses a different grid".into()));
        }
        Ok(Scenario {
            terrain,
            ..self.clone()
        })
    }
}
