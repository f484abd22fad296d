//! Six small dam-break fixtures on a 64 x 64 grid of 1 m cells.
//!
//! A 1 m deep circular water column sits in the middle of a flat domain.
//! Barriers 1 m high channel the released water towards one or two
//! rectangular assets. Layouts are qualitative reconstructions, not data.

use super::Scenario;
use crate::error::{Error, Result};
use crate::geometry::{AssetPolygon, Point};
use crate::grid::{GridSpec, ScalarField};
use crate::structures::WallSpec;
use crate::swe::{Boundary, SourceTerms};

pub const BUILTIN_COUNT: usize = 6;

const SIZE: usize = 64;
const COLUMN_CENTRE: (f64, f64) = (32.0, 32.0);
const COLUMN_RADIUS: f64 = 12.0;
const COLUMN_DEPTH: f64 = 1.0;
const BARRIER_HEIGHT: f64 = 1.0;

/// Axis-aligned box `[x0, x1) x [y0, y1)` of barrier cells, by cell centre.
type Block = (f64, f64, f64, f64);

struct Layout {
    barriers: Vec<Block>,
    /// `(x_min, y_min, x_max, y_max)` rectangles.
    assets: Vec<(f64, f64, f64, f64)>,
}

fn layout(index: usize) -> Layout {
    match index {
        // east asset behind a north-south barrier with one gap
        1 => Layout {
            barriers: vec![(44.0, 46.0, 8.0, 28.0), (44.0, 46.0, 36.0, 56.0)],
            assets: vec![(50.0, 28.0, 58.0, 36.0)],
        },
        // north-east asset inside an L-shaped barrier with a gap in each leg
        2 => Layout {
            barriers: vec![
                (44.0, 46.0, 44.0, 50.0),
                (44.0, 46.0, 57.0, 64.0),
                (46.0, 50.0, 44.0, 46.0),
                (57.0, 64.0, 44.0, 46.0),
            ],
            assets: vec![(52.0, 52.0, 60.0, 60.0)],
        },
        // assets east and west, each behind a gapped barrier
        3 => Layout {
            barriers: vec![
                (18.0, 20.0, 8.0, 28.0),
                (18.0, 20.0, 36.0, 56.0),
                (44.0, 46.0, 8.0, 28.0),
                (44.0, 46.0, 36.0, 56.0),
            ],
            assets: vec![(6.0, 28.0, 14.0, 36.0), (50.0, 28.0, 58.0, 36.0)],
        },
        // north asset behind an east-west barrier with two gaps
        4 => Layout {
            barriers: vec![
                (8.0, 18.0, 46.0, 48.0),
                (24.0, 40.0, 46.0, 48.0),
                (46.0, 56.0, 46.0, 48.0),
            ],
            assets: vec![(28.0, 52.0, 36.0, 60.0)],
        },
        // open ground, asset close to the south
        5 => Layout {
            barriers: vec![],
            assets: vec![(28.0, 4.0, 36.0, 12.0)],
        },
        // east asset at the end of a walled channel
        6 => Layout {
            barriers: vec![
                (44.0, 64.0, 26.0, 28.0),
                (44.0, 64.0, 36.0, 38.0),
                (44.0, 46.0, 8.0, 26.0),
                (44.0, 46.0, 38.0, 56.0),
            ],
            assets: vec![(54.0, 29.0, 62.0, 35.0)],
        },
        _ => unreachable!("fixture index checked by caller"),
    }
}

/// Built-in scenario `index` in `1..=6`.
pub fn builtin_scenario(index: usize) -> Result<Scenario> {
    if !(1..=BUILTIN_COUNT).contains(&index) {
        return Err(Error::Usage(format!(
            "built-in scenario index must be 1..={BUILTIN_COUNT}, got {index}"
        )));
    }
    let grid = GridSpec::new(SIZE, SIZE, 1.0, 0.0, 0.0)?;
    let layout = layout(index);
    let terrain = ScalarField::from_fn(grid, |x, y| {
        let blocked = layout
            .barriers
            .iter()
            .any(|&(x0, x1, y0, y1)| x >= x0 && x < x1 && y >= y0 && y < y1);
        if blocked {
            BARRIER_HEIGHT
        } else {
            0.0
        }
    });
    let initial_depth = ScalarField::from_fn(grid, |x, y| {
        let r = (x - COLUMN_CENTRE.0).hypot(y - COLUMN_CENTRE.1);
        if r <= COLUMN_RADIUS {
            COLUMN_DEPTH
        } else {
            0.0
        }
    });
    let assets = layout
        .assets
        .iter()
        .enumerate()
        .map(|(k, &(x0, y0, x1, y1))| {
            AssetPolygon::rectangle(
                format!("asset-{}", k + 1),
                Point::new(x0, y0),
                Point::new(x1, y1),
                1.0,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let scenario = Scenario {
        name: format!("builtin-{index}"),
        terrain,
        initial_depth,
        assets,
        sources: SourceTerms::default(),
        boundary: Boundary::CriticalDepth,
        duration: 100.0,
        report_interval: 1.0,
        wall_spec: WallSpec::new(8.0, 2.5, 1.0)?,
    };
    scenario.validate()?;
    Ok(scenario)
}
