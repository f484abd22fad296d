//! Regular raster geometry shared by the solver, the structure rasteriser and
//! the pathline tracer.
//!
//! Cells are square. Column index `i` grows eastwards (x), row index `j` grows
//! northwards (y) and `(0, 0)` is the south-west cell. Values are stored
//! row-major: `index = j * n_cols + i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_cols: usize,
    pub n_rows: usize,
    pub cell_size: f64,
    pub origin_x: f64,
    pub origin_y: f64,
}

impl GridSpec {
    pub fn new(
        n_cols: usize,
        n_rows: usize,
        cell_size: f64,
        origin_x: f64,
        origin_y: f64,
    ) -> Result<Self> {
        if n_cols < 2 || n_rows < 2 {
            return Err(Error::Usage(format!(
                "grid must be at least 2x2 cells, got {n_cols}x{n_rows}"
            )));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::Usage(format!(
                "cell size must be positive, got {cell_size}"
            )));
        }
        if !origin_x.is_finite() || !origin_y.is_finite() {
            return Err(Error::Usage("grid origin must be finite".into()));
        }
        Ok(Self {
            n_cols,
            n_rows,
            cell_size,
            origin_x,
            origin_y,
        })
    }

    pub fn len(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_max(&self) -> f64 {
        self.origin_x + self.n_cols as f64 * self.cell_size
    }

    pub fn y_max(&self) -> f64 {
        self.origin_y + self.n_rows as f64 * self.cell_size
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }

    pub fn diagonal(&self) -> f64 {
        (self.x_max() - self.origin_x).hypot(self.y_max() - self.origin_y)
    }

    /// Closed domain extent test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.origin_x && x <= self.x_max() && y >= self.origin_y && y <= self.y_max()
    }

    /// Cell containing `(x, y)`. Cells are half-open on their upper edges
    /// except along the domain's east and north boundaries, which belong to
    /// the last column and row.
    pub fn get_index(&self, x: f64, y: f64) -> Result<(usize, usize)> {
        if !self.contains(x, y) {
            return Err(Error::OutOfDomain { x, y });
        }
        let i = axis_index(x - self.origin_x, self.cell_size, self.n_cols);
        let j = axis_index(y - self.origin_y, self.cell_size, self.n_rows);
        Ok((i, j))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Result<(f64, f64)> {
        if i >= self.n_cols || j >= self.n_rows {
            return Err(Error::Usage(format!(
                "cell ({i}, {j}) outside {}x{} grid",
                self.n_cols, self.n_rows
            )));
        }
        Ok(self.center_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn center_unchecked(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin_x + (i as f64 + 0.5) * self.cell_size,
            self.origin_y + (j as f64 + 0.5) * self.cell_size,
        )
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_cols + i
    }

    /// Inclusive range of columns whose centres can fall inside `[lo, hi]`.
    pub(crate) fn column_span(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        center_span(lo - self.origin_x, hi - self.origin_x, self.cell_size, self.n_cols)
    }

    pub(crate) fn row_span(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        center_span(lo - self.origin_y, hi - self.origin_y, self.cell_size, self.n_rows)
    }
}

fn axis_index(offset: f64, cell_size: f64, n: usize) -> usize {
    let k = (offset / cell_size).floor();
    if k < 0.0 {
        0
    } else {
        (k as usize).min(n - 1)
    }
}

fn center_span(lo: f64, hi: f64, cell_size: f64, n: usize) -> Option<(usize, usize)> {
    // centre of cell k sits at (k + 0.5) * cell_size
    let first = (lo / cell_size - 0.5).ceil().max(0.0);
    let last = (hi / cell_size - 0.5).floor();
    if last < 0.0 || first > last || first >= n as f64 {
        return None;
    }
    Some((first as usize, (last as usize).min(n - 1)))
}

/// One real value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(spec: GridSpec) -> Self {
        Self::filled(spec, 0.0)
    }

    pub fn filled(spec: GridSpec, value: f64) -> Self {
        Self {
            spec,
            values: vec![value; spec.len()],
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Usage(format!(
                "field has {} values, grid needs {}",
                values.len(),
                spec.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Usage(format!("non-finite value at cell {k}")));
        }
        Ok(Self { spec, values })
    }

    /// Builds a field by evaluating `f` at each cell centre.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(spec.len());
        for j in 0..spec.n_rows {
            for i in 0..spec.n_cols {
                let (x, y) = spec.center_unchecked(i, j);
                values.push(f(x, y));
            }
        }
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.spec.index(i, j);
        self.values[k] = value;
    }

    /// Value of the cell containing `(x, y)`.
    pub fn sample(&self, x: f64, y: f64) -> Result<f64> {
        let (i, j) = self.spec.get_index(x, y)?;
        Ok(self.get(i, j))
    }

    /// Cell-wise sum. Both fields must share a grid.
    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        if self.spec != other.spec {
            return Err(Error::Usage("fields are defined on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ScalarField {
            spec: self.spec,
            values,
        })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}
