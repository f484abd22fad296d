//! TOML manifest referencing sibling raster files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ascii::{read_raster, write_raster};
use super::Scenario;
use crate::error::{Error, Result};
use crate::geometry::AssetPolygon;
use crate::structures::WallSpec;
use crate::swe::{Boundary, SourceTerms};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    name: String,
    duration: f64,
    report_interval: f64,
    boundary: Boundary,
    /// Raster paths, relative to the manifest's directory.
    terrain: PathBuf,
    initial_depth: PathBuf,
    wall: WallSpec,
    #[serde(default)]
    sources: SourceTerms,
    assets: Vec<AssetPolygon>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.span().map_or(1, |s| line_of(&text, s.start)),
        message: e.message().to_string(),
    })?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let load = |field: &str, rel: &Path| {
        read_raster(&dir.join(rel)).map_err(|e| match e {
            Error::Parse {
                path,
                line,
                message,
            } => Error::Parse {
                path,
                line,
                message: format!("{field}: {message}"),
            },
            other => other,
        })
    };
    let scenario = Scenario {
        name: manifest.name,
        terrain: load("terrain", &manifest.terrain)?,
        initial_depth: load("initial_depth", &manifest.initial_depth)?,
        assets: manifest.assets,
        sources: manifest.sources,
        boundary: manifest.boundary,
        duration: manifest.duration,
        report_interval: manifest.report_interval,
        wall_spec: manifest.wall,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Writes `path` plus `<stem>.terrain.asc` and `<stem>.initial_depth.asc`
/// beside it.
pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Usage(format!("bad manifest path {}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let terrain = PathBuf::from(format!("{stem}.terrain.asc"));
    let initial = PathBuf::from(format!("{stem}.initial_depth.asc"));
    write_raster(&scenario.terrain, &dir.join(&terrain))?;
    write_raster(&scenario.initial_depth, &dir.join(&initial))?;
    let manifest = Manifest {
        name: scenario.name.clone(),
        duration: scenario.duration,
        report_interval: scenario.report_interval,
        boundary: scenario.boundary,
        terrain,
        initial_depth: initial,
        wall: scenario.wall_spec,
        sources: scenario.sources.clone(),
        assets: scenario.assets.clone(),
    };
    let text = toml::to_string(&manifest)
        .map_err(|e| Error::Usage(format!("cannot serialise scenario: {e}")))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
