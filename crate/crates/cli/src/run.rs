//! Command implementations. Artifacts are staged in a sibling temporary
//! directory and moved into place only when every file was written.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use floodwall::objective::flood_volume;
use floodwall::optimizer::{self, solve_ofmp, solve_sequential};
use floodwall::scenario_io::{
    builtin_scenario, load_scenario, write_configuration_csv, write_convergence_csv, write_raster,
    write_region_exteriors,
};
use floodwall::{DeConfig, Error, Mode, Region, Result, Scenario, SearchBudget, SimulationRecord};

pub const MAX_DEPTH_FILE: &str = "max_depth.asc";
pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const ELEVATION_FILE: &str = "best_elevation.asc";
pub const CONFIGURATION_FILE: &str = "configuration.csv";
pub const REGION_FILE: &str = "region.csv";

pub enum Source {
    Builtin(usize),
    Manifest(PathBuf),
}

impl Source {
    fn load(&self) -> Result<Scenario> {
        match self {
            Source::Builtin(k) => builtin_scenario(*k),
            Source::Manifest(path) => load_scenario(path),
        }
    }
}

pub struct OptimizeSpec {
    pub source: Source,
    pub mode: Mode,
    pub sequential: bool,
    pub walls: usize,
    pub seed: u64,
    pub max_evals: Option<usize>,
    pub time_limit: Option<f64>,
    pub alpha: Option<f64>,
    pub workers: usize,
    pub out: PathBuf,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_solver_failure() => 3,
        Error::Io { .. } | Error::Parse { .. } => 4,
        _ => 2,
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Fails early when `out` exists but is not a directory.
fn check_out(out: &Path) -> Result<()> {
    if out.exists() && !out.is_dir() {
        return Err(Error::Usage(format!(
            "output path {} exists and is not a directory",
            out.display()
        )));
    }
    Ok(())
}

/// Runs `write` against a fresh staging directory next to `out`, then moves
/// the staged files into `out`.
fn publish(out: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".floodwall-")
        .tempdir_in(parent)
        .map_err(|e| io_error(parent, e))?;
    write(staging.path())?;
    if out.is_dir() {
        let entries = fs::read_dir(staging.path()).map_err(|e| io_error(staging.path(), e))?;
        for entry in entries {
            let entry = entry.map_err(|e| io_error(staging.path(), e))?;
            let target = out.join(entry.file_name());
            fs::rename(entry.path(), &target).map_err(|e| io_error(&target, e))?;
        }
    } else {
        let staged = staging.keep();
        fs::rename(&staged, out).map_err(|e| io_error(out, e))?;
    }
    Ok(())
}

fn write_snapshots(record: &SimulationRecord, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    let mut text = String::from("snapshot,time,volume,max_depth\n");
    for (k, s) in record.snapshots.iter().enumerate() {
        let peak = s.h.iter().copied().fold(0.0, f64::max);
        text.push_str(&format!("{k},{:?},{:?},{:?}\n", s.time, s.volume(), peak));
    }
    w.write_all(text.as_bytes()).map_err(|e| io_error(path, e))?;
    w.flush().map_err(|e| io_error(path, e))
}

pub fn simulate(source: &Source, out: &Path) -> Result<()> {
    check_out(out)?;
    let scenario = source.load()?;
    let record = scenario.simulate(&floodwall::ScalarField::zeros(*scenario.grid()))?;
    publish(out, |dir| {
        write_raster(&record.max_depth, &dir.join(MAX_DEPTH_FILE))?;
        write_snapshots(&record, &dir.join(SNAPSHOTS_FILE))
    })?;
    println!(
        "{}: {} steps, flooded asset volume {:.6} m3",
        scenario.name,
        record.steps,
        flood_volume(&record.max_depth, &scenario.assets)
    );
    Ok(())
}

pub fn optimize(spec: &OptimizeSpec) -> Result<()> {
    check_out(&spec.out)?;
    if spec.walls == 0 {
        return Err(Error::Usage("--walls must be at least 1".into()));
    }
    let time_limit = match spec.time_limit {
        Some(t) if t > 0.0 && t.is_finite() => Some(Duration::from_secs_f64(t)),
        Some(t) => return Err(Error::Usage(format!("--time-limit must be positive, got {t}"))),
        None => None,
    };
    let budget = SearchBudget {
        max_evaluations: spec.max_evals,
        time_limit,
    };
    budget.validate().map_err(|_| {
        Error::Usage("give --max-evals, --time-limit or both".into())
    })?;
    if spec.sequential && spec.walls < 2 {
        eprintln!("warning: --sequential with a single wall is an ordinary run");
    }

    let scenario = spec.source.load()?;
    let alpha = spec
        .alpha
        .unwrap_or_else(|| optimizer::default_alpha(scenario.grid()));
    let de = DeConfig {
        seed: spec.seed,
        workers: spec.workers,
        ..DeConfig::default()
    };
    let result = if spec.sequential {
        solve_sequential(&scenario, spec.walls, &budget, spec.mode, &de, alpha)?
    } else {
        solve_ofmp(&scenario, spec.walls, &budget, spec.mode, &de, alpha)?
    };
    let region = result
        .restriction_trace
        .last()
        .cloned()
        .unwrap_or_else(Region::all_plane);

    publish(&spec.out, |dir| {
        write_convergence_csv(&result, &dir.join(CONVERGENCE_FILE))?;
        write_raster(&result.best_elevation, &dir.join(ELEVATION_FILE))?;
        write_configuration_csv(&result.best_config, &dir.join(CONFIGURATION_FILE))?;
        write_region_exteriors(&region, &dir.join(REGION_FILE))
    })?;
    println!(
        "{}: {} evaluations, {} simulations, objective {:.6} (unmitigated {:.6})",
        scenario.name,
        result.history.len(),
        result.pde_solves,
        result.best_objective.total,
        result.unmitigated.total
    );
    println!("best configuration: {}", result.best_config);
    Ok(())
}
