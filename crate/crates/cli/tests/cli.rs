use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use floodwall::scenario_io::{builtin_scenario, read_raster, save_scenario};

fn floodwall(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floodwall"))
        .args(args)
        .env_remove("FLOODWALL_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn records(path: &Path) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    let rows = r.records().collect::<Result<Vec<_>, _>>().unwrap();
    (header, rows)
}

fn optimize_into(out: &Path) -> Output {
    floodwall(&[
        "optimize", "--builtin", "1", "--mode", "pathline", "--walls", "1", "--seed", "7",
        "--max-evals", "200", "--out", out.to_str().unwrap(),
    ])
}

#[test]
fn optimize_artifacts_parse_and_repeat_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let first = optimize_into(&a);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));

    let (header, rows) = records(&a.join("convergence.csv"));
    assert_eq!(&header, vec!["evaluation", "objective", "best_objective", "feasible"]);
    assert_eq!(rows.len(), 200);
    let best: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(best.windows(2).all(|w| w[1] <= w[0]));

    let (header, rows) = records(&a.join("configuration.csv"));
    assert_eq!(&header, vec!["wall", "x", "y", "angle"]);
    assert!(rows.len() <= 1);
    for r in &rows {
        let angle: f64 = r[3].parse().unwrap();
        assert!((0.0..=std::f64::consts::PI).contains(&angle));
    }

    let (header, rows) = records(&a.join("region.csv"));
    assert_eq!(&header, vec!["polyline", "vertex", "x", "y"]);
    assert!(!rows.is_empty(), "pathline mode has a bounded region");

    let elevation = read_raster(&a.join("best_elevation.asc")).unwrap();
    let terrain = builtin_scenario(1).unwrap().terrain;
    assert_eq!(elevation.spec(), terrain.spec());
    assert!(elevation.values().iter().zip(terrain.values()).all(|(e, t)| e >= t));

    let second = optimize_into(&b);
    assert_eq!(code(&second), 0);
    assert_eq!(
        fs::read(a.join("convergence.csv")).unwrap(),
        fs::read(b.join("convergence.csv")).unwrap()
    );
}

#[test]
fn simulate_floods_the_builtin_asset() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let run = floodwall(&["simulate", "--builtin", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let depth = read_raster(&out.join("max_depth.asc")).unwrap();
    let scenario = builtin_scenario(3).unwrap();
    for asset in &scenario.assets {
        let c = asset.exterior.iter().fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
        let n = asset.exterior.len() as f64;
        assert!(depth.sample(c.0 / n, c.1 / n).unwrap() > 0.0, "{}", asset.name);
    }
    let (header, rows) = records(&out.join("snapshots.csv"));
    assert_eq!(&header, vec!["snapshot", "time", "volume", "max_depth"]);
    assert_eq!(rows.len(), 101);
}

#[test]
fn simulate_reads_manifests() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = tmp.path().join("five.toml");
    save_scenario(&builtin_scenario(5).unwrap(), &manifest).unwrap();
    let out = tmp.path().join("sim");
    let run = floodwall(&[
        "simulate", "--scenario", manifest.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("max_depth.asc").is_file());
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = out.to_str().unwrap();
    for args in [
        vec!["simulate", "--out", o],
        vec!["simulate", "--builtin", "1", "--scenario", "s.toml", "--out", o],
        vec!["simulate", "--builtin", "9", "--out", o],
        vec!["optimize", "--builtin", "1", "--out", o],
        vec!["optimize", "--builtin", "1", "--walls", "0", "--max-evals", "5", "--out", o],
        vec!["optimize", "--builtin", "1", "--max-evals", "5", "--time-limit", "-1", "--out", o],
        vec!["optimize", "--builtin", "1", "--mode", "sideways", "--max-evals", "5", "--out", o],
        vec!["optimize", "--builtin", "1", "--max-evals", "5", "--workers", "0", "--out", o],
        vec!["frobnicate"],
    ] {
        let run = floodwall(&args);
        assert_eq!(code(&run), 2, "{args:?}: {}", String::from_utf8_lossy(&run.stderr));
    }
    assert!(!out.exists(), "no artifacts after a failed run");
}

#[test]
fn file_errors_exit_with_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out: PathBuf = tmp.path().join("x");
    let missing = tmp.path().join("missing.toml");
    let run = floodwall(&[
        "simulate", "--scenario", missing.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 4);

    let broken = tmp.path().join("broken.toml");
    fs::write(&broken, "name = \"x\"\nduration = \n").unwrap();
    let run = floodwall(&[
        "simulate", "--scenario", broken.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 4);
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 2"));
    assert!(!out.exists());
}

#[test]
fn output_path_must_be_a_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("taken");
    fs::write(&file, "keep").unwrap();
    let run = floodwall(&["simulate", "--builtin", "5", "--out", file.to_str().unwrap()]);
    assert_eq!(code(&run), 2);
    assert_eq!(fs::read_to_string(&file).unwrap(), "keep");
}

#[test]
fn sequential_single_wall_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("seq");
    let run = floodwall(&[
        "optimize", "--builtin", "5", "--mode", "direct", "--sequential", "--walls", "1",
        "--max-evals", "3", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stderr).contains("warning"));
    let (_, rows) = records(&out.join("convergence.csv"));
    assert_eq!(rows.len(), 3);
}
