//! ESRI ASCII grid rasters.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

const NODATA: f64 = -9999.0;

/// Writes `field` with rows from north to south. Values use the shortest
/// representation that reads back to the same bits.
pub fn write_raster(field: &ScalarField, path: &Path) -> Result<()> {
    fs::write(path, format_raster(field)).map_err(|e| Error::io(path, e))
}

pub fn format_raster(field: &ScalarField) -> String {
    let g = field.spec();
    let mut out = Vec::new();
    writeln!(out, "ncols {}", g.n_cols).unwrap();
    writeln!(out, "nrows {}", g.n_rows).unwrap();
    writeln!(out, "xllcorner {:?}", g.origin_x).unwrap();
    writeln!(out, "yllcorner {:?}", g.origin_y).unwrap();
    writeln!(out, "cellsize {:?}", g.cell_size).unwrap();
    writeln!(out, "NODATA_value {NODATA:?}").unwrap();
    for j in (0..g.n_rows).rev() {
        let row: Vec<String> = (0..g.n_cols).map(|i| format!("{:?}", field.get(i, j))).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    String::from_utf8(out).expect("raster text is ASCII")
}

pub fn read_raster(path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_raster(&text, path)
}

pub fn parse_raster(text: &str, path: &Path) -> Result<ScalarField> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).peekable();

    let mut n_cols = None;
    let mut n_rows = None;
    let mut x0 = None;
    let mut y0 = None;
    let mut centred = false;
    let mut cell = None;
    let mut nodata = None;
    while let Some(&(no, line)) = lines.peek() {
        let mut parts = line.split_whitespace();
        let Some(key) = parts.next() else {
            lines.next();
            continue;
        };
        if key.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.') {
            break;
        }
        let value = parts
            .next()
            .ok_or_else(|| err(no, format!("header '{key}' has no value")))?;
        let number = || {
            value
                .parse::<f64>()
                .map_err(|_| err(no, format!("header '{key}' value '{value}' is not a number")))
        };
        let count = || {
            value
                .parse::<usize>()
                .map_err(|_| err(no, format!("header '{key}' value '{value}' is not a count")))
        };
        match key.to_ascii_lowercase().as_str() {
            "ncols" => n_cols = Some(count()?),
            "nrows" => n_rows = Some(count()?),
            "xllcorner" => x0 = Some(number()?),
            "yllcorner" => y0 = Some(number()?),
            "xllcenter" => {
                x0 = Some(number()?);
                centred = true;
            }
            "yllcenter" => {
                y0 = Some(number()?);
                centred = true;
            }
            "cellsize" => cell = Some(number()?),
            "nodata_value" => nodata = Some(number()?),
            other => return Err(err(no, format!("unknown header '{other}'"))),
        }
        lines.next();
    }
    let missing = |name: &str| err(1, format!("missing header '{name}'"));
    let n_cols = n_cols.ok_or_else(|| missing("ncols"))?;
    let n_rows = n_rows.ok_or_else(|| missing("nrows"))?;
    let cell = cell.ok_or_else(|| missing("cellsize"))?;
    let (mut x0, mut y0) = (
        x0.ok_or_else(|| missing("xllcorner"))?,
        y0.ok_or_else(|| missing("yllcorner"))?,
    );
    if centred {
        x0 -= 0.5 * cell;
        y0 -= 0.5 * cell;
    }
    let spec = GridSpec::new(n_cols, n_rows, cell, x0, y0)
        .map_err(|e| err(1, e.to_string()))?;

    let mut values = vec![0.0; spec.len()];
    let mut count = 0usize;
    let mut last_line = 1;
    for (no, line) in lines {
        last_line = no;
        for token in line.split_whitespace() {
            if count >= spec.len() {
                return Err(err(no, format!("more than {} values", spec.len())));
            }
            let v: f64 = token
                .parse()
                .map_err(|_| err(no, format!("value '{token}' is not a number")))?;
            if nodata == Some(v) {
                return Err(err(no, "NODATA cells are not supported".into()));
            }
            let (row, col) = (count / n_cols, count % n_cols);
            values[spec.index(col, n_rows - 1 - row)] = v;
            count += 1;
        }
    }
    if count != spec.len() {
        return Err(err(
            last_line,
            format!(
                "dimension mismatch: expected {} x {} = {} values, found {count}",
                n_cols,
                n_rows,
                spec.len()
            ),
        ));
    }
    ScalarField::from_values(spec, values).map_err(|e| err(last_line, e.to_string()))
}
