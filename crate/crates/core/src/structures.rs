//! Rectangular walls and their rasterisation onto the elevation grid.

use std::fmt;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AssetPolygon, Point};
use crate::grid::{GridSpec, ScalarField};

/// Dimensions shared by every wall of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallSpec {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl WallSpec {
    pub fn new(length: f64, width: f64, height: f64) -> Result<Self> {
        let spec = Self {
            length,
            width,
            height,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("width", self.width),
            ("height", self.height),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("wall {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Radius of the circle that encloses a wall at any angle.
    fn reach(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }
}

/// Placement of one wall: centroid and angle from the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallParams {
    pub x: f64,
    pub y: f64,
    pub angle: f64,
}

impl WallParams {
    pub const fn new(x: f64, y: f64, angle: f64) -> Self {
        Self { x, y, angle }
    }

    pub fn centroid(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Checks the centroid lies in the domain and the angle in `[0, pi]`.
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !grid.contains(self.x, self.y) {
            return Err(Error::Validation(format!(
                "wall centroid ({}, {}) outside the domain",
                self.x, self.y
            )));
        }
        if !(0.0..=PI).contains(&self.angle) {
            return Err(Error::Validation(format!(
                "wall angle {} outside [0, pi]",
                self.angle
            )));
        }
        Ok(())
    }
}

/// An ordered set of walls sharing one [`WallSpec`]. An empty list is the
/// do-nothing configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub walls: Vec<WallParams>,
    pub spec: WallSpec,
}

impl Configuration {
    pub fn new(walls: Vec<WallParams>, spec: WallSpec) -> Self {
        Self { walls, spec }
    }

    pub fn empty(spec: WallSpec) -> Self {
        Self::new(Vec::new(), spec)
    }

    pub fn len(&self) -> usize {
        self.walls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walls.is_empty()
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        self.spec.validate()?;
        self.walls.iter().try_for_each(|w| w.validate(grid))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, w) in self.walls.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "(x={}, y={}, angle={})", w.x, w.y, w.angle)?;
        }
        f.write_str("]")
    }
}

/// Closed membership test for the rotated rectangle of a wall.
pub fn wall_footprint(wall: &WallParams, spec: &WallSpec, x: f64, y: f64) -> bool {
    let (sin, cos) = wall.angle.sin_cos();
    let (dx, dy) = (x - wall.x, y - wall.y);
    let along = dx * cos - dy * sin;
    let across = dx * sin + dy * cos;
    along.abs() <= 0.5 * spec.length && across.abs() <= 0.5 * spec.width
}

/// Adds `height` to every cell whose centre falls inside the wall.
fn stamp(field: &mut ScalarField, wall: &WallParams, spec: &WallSpec) {
    let grid = *field.spec();
    let r = spec.reach();
    let (Some((i0, i1)), Some((j0, j1))) = (
        grid.column_span(wall.x - r, wall.x + r),
        grid.row_span(wall.y - r, wall.y + r),
    ) else {
        return;
    };
    for j in j0..=j1 {
        for i in i0..=i1 {
            let (x, y) = grid.center_unchecked(i, j);
            if wall_footprint(wall, spec, x, y) {
                let k = grid.index(i, j);
                field.values_mut()[k] += spec.height;
            }
        }
    }
}

/// Structure height field: each cell gets the wall height once per wall whose
/// footprint holds its centre. Parts outside the grid are dropped.
pub fn rasterize_configuration(config: &Configuration, grid: &GridSpec) -> ScalarField {
    let mut field = ScalarField::zeros(*grid);
    for wall in &config.walls {
        stamp(&mut field, wall, &config.spec);
    }
    field
}

/// Sum over assets of the wall volume standing on cells whose centre lies in
/// the asset.
pub fn wall_asset_volume(config: &Configuration, assets: &[AssetPolygon], grid: &GridSpec) -> f64 {
    if config.is_empty() || assets.is_empty() {
        return 0.0;
    }
    let field = rasterize_configuration(config, grid);
    assets
        .iter()
        .map(|a| integrate_over(&field, a))
        .sum()
}

/// Cell-centre quadrature of `field` over `polygon`.
pub(crate) fn integrate_over(field: &ScalarField, polygon: &AssetPolygon) -> f64 {
    let grid = field.spec();
    let (lo, hi) = polygon.bounding_box();
    let (Some((i0, i1)), Some((j0, j1))) = (grid.column_span(lo.x, hi.x), grid.row_span(lo.y, hi.y))
    else {
        return 0.0;
    };
    let mut total = 0.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let v = field.get(i, j);
            if v == 0.0 {
                continue;
            }
            let (x, y) = grid.center_unchecked(i, j);
            if polygon.contains(Point::new(x, y)) {
                total += v;
            }
        }
    }
    total * grid.cell_area()
}
