//! CSV outputs of optimisation runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::optimizer::SolveResult;
use crate::pathline::Pathline;
use crate::structures::Configuration;

pub const CONVERGENCE_HEADER: [&str; 4] = ["evaluation", "objective", "best_objective", "feasible"];

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = csv::Writer::from_writer(BufWriter::new(file));
    let io = |e: csv::Error| Error::io(path, e.into());
    out.write_record(header).map_err(io)?;
    for row in rows {
        out.write_record(&row).map_err(io)?;
    }
    let inner = out.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    inner
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// One row per evaluation: 1-based index, candidate total, best total so far
/// and whether the candidate was feasible.
pub fn write_convergence_csv(result: &SolveResult, path: &Path) -> Result<()> {
    write_rows(
        path,
        &CONVERGENCE_HEADER,
        result.history.iter().map(|e| {
            vec![
                e.index.to_string(),
                format!("{:?}", e.objective.total),
                format!("{:?}", e.best_total),
                e.objective.feasible.to_string(),
            ]
        }),
    )
}

/// Boundary polylines of a region: polyline id, vertex index, x, y.
pub fn write_region_exteriors(region: &Region, path: &Path) -> Result<()> {
    let lines = region.exteriors();
    write_rows(
        path,
        &["polyline", "vertex", "x", "y"],
        lines.iter().enumerate().flat_map(|(id, line)| {
            line.iter().enumerate().map(move |(k, p)| {
                vec![id.to_string(), k.to_string(), format!("{:?}", p.x), format!("{:?}", p.y)]
            })
        }),
    )
}

/// Pathline points: seed index, point index, x, y.
pub fn write_pathlines_csv(pathlines: &[Pathline], path: &Path) -> Result<()> {
    write_rows(
        path,
        &["seed", "point", "x", "y"],
        pathlines.iter().enumerate().flat_map(|(s, line)| {
            line.points.iter().enumerate().map(move |(k, p)| {
                vec![s.to_string(), k.to_string(), format!("{:?}", p.x), format!("{:?}", p.y)]
            })
        }),
    )
}

/// Wall placements: wall index, centroid x, centroid y, angle in radians.
pub fn write_configuration_csv(config: &Configuration, path: &Path) -> Result<()> {
    write_rows(
        path,
        &["wall", "x", "y", "angle"],
        config.walls.iter().enumerate().map(|(k, w)| {
            vec![
                k.to_string(),
                format!("{:?}", w.x),
                format!("{:?}", w.y),
                format!("{:?}", w.angle),
            ]
        }),
    )
}
