//! Placement of fixed-size flood walls that minimise flooding over protected
//! assets.
//!
//! The crate embeds an explicit finite-volume shallow-water solver ([`swe`]),
//! rasterises wall configurations onto the terrain ([`structures`]), derives
//! restricted search regions from reverse-time pathlines ([`pathline`],
//! [`geometry`]) and searches wall parameters with differential evolution
//! ([`optimizer`]) under a penalised objective ([`objective`]).

pub mod error;
pub mod geometry;
pub mod grid;
pub mod objective;
pub mod optimizer;
pub mod pathline;
pub mod scenario_io;
pub mod structures;
pub mod swe;

pub use error::{Error, Result};
pub use geometry::{AssetPolygon, Point, Region, Triangle};
pub use grid::{GridSpec, ScalarField};
pub use objective::{ObjectiveBreakdown, PenaltyWeights};
pub use optimizer::{DeConfig, Mode, SearchBudget, SolveResult};
pub use scenario_io::Scenario;
pub use structures::{Configuration, WallParams, WallSpec};
pub use swe::{Boundary, FlowState, Friction, SimulationRecord, SourceTerms};
