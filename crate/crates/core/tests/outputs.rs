use std::f64::consts::PI;
use std::path::Path;

use floodwall::optimizer::{default_alpha, solve_ofmp};
use floodwall::pathline::Pathline;
use floodwall::scenario_io::{
    builtin_scenario, load_scenario, read_raster, save_scenario, write_configuration_csv,
    write_convergence_csv, write_pathlines_csv, write_raster, write_region_exteriors,
    CONVERGENCE_HEADER,
};
use floodwall::{
    Configuration, DeConfig, Mode, Point, Region, SearchBudget, Triangle, WallParams, WallSpec,
};
use proptest::prelude::*;
use tempfile::TempDir;

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn convergence_rows_follow_history() {
    let s = builtin_scenario(5).unwrap();
    let r = solve_ofmp(
        &s,
        1,
        &SearchBudget::evaluations(12),
        Mode::Direct,
        &DeConfig::default(),
        default_alpha(s.grid()),
    )
    .unwrap();
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("convergence.csv");
    write_convergence_csv(&r, &path).unwrap();
    let (header, rows) = read_rows(&path);
    assert_eq!(header, CONVERGENCE_HEADER);
    assert_eq!(rows.len(), 12);
    for (row, e) in rows.iter().zip(&r.history) {
        assert_eq!(row[0].parse::<usize>().unwrap(), e.index);
        assert_eq!(row[1].parse::<f64>().unwrap(), e.objective.total);
        assert_eq!(row[2].parse::<f64>().unwrap(), e.best_total);
        assert_eq!(row[3].parse::<bool>().unwrap(), e.objective.feasible);
    }
}

#[test]
fn region_polylines_close_each_triangle() {
    let region = Region::from_triangles(vec![Triangle::new(
        Point::new(0.0, 0.0),
        Point::new(4.0, 0.0),
        Point::new(0.0, 3.0),
    )]);
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("region.csv");
    write_region_exteriors(&region, &path).unwrap();
    let (header, rows) = read_rows(&path);
    assert_eq!(header, ["polyline", "vertex", "x", "y"]);
    assert!(rows.len() >= 3);
    assert!(rows.iter().all(|r| r[0] == "0"));

    write_region_exteriors(&Region::empty(), &path).unwrap();
    assert_eq!(read_rows(&path).1.len(), 0);
}

#[test]
fn pathline_rows_are_indexed_by_seed() {
    let lines = vec![
        Pathline {
            seed: Point::new(1.0, 1.0),
            points: vec![Point::new(1.0, 1.0), Point::new(0.5, 1.0)],
            wet_time: Some(3.0),
            length: 0.5,
        },
        Pathline {
            seed: Point::new(2.0, 2.0),
            points: vec![Point::new(2.0, 2.0)],
            wet_time: None,
            length: 0.0,
        },
    ];
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("pathlines.csv");
    write_pathlines_csv(&lines, &path).unwrap();
    let (header, rows) = read_rows(&path);
    assert_eq!(header, ["seed", "point", "x", "y"]);
    let keys: Vec<(&str, &str)> = rows.iter().map(|r| (r[0].as_str(), r[1].as_str())).collect();
    assert_eq!(keys, [("0", "0"), ("0", "1"), ("1", "0")]);
}

#[test]
fn saved_fixture_reloads_equal() {
    let s = builtin_scenario(3).unwrap();
    let dir = TempDir::new().unwrap();
    let manifest = dir.path().join("scenario.toml");
    save_scenario(&s, &manifest).unwrap();
    let back = load_scenario(&manifest).unwrap();
    assert_eq!(back, s);
    let raster = dir.path().join("terrain.asc");
    write_raster(&s.terrain, &raster).unwrap();
    assert_eq!(read_raster(&raster).unwrap(), s.terrain);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn configuration_csv_round_trips(
        walls in proptest::collection::vec((0.0f64..64.0, 0.0f64..64.0, 0.0f64..PI), 0..5),
    ) {
        let config = Configuration::new(
            walls.iter().map(|&(x, y, a)| WallParams::new(x, y, a)).collect(),
            WallSpec::new(8.0, 2.5, 1.0).unwrap(),
        );
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("configuration.csv");
        write_configuration_csv(&config, &path).unwrap();
        let (header, rows) = read_rows(&path);
        prop_assert_eq!(header, ["wall", "x", "y", "angle"]);
        prop_assert_eq!(rows.len(), walls.len());
        for (k, (row, w)) in rows.iter().zip(&config.walls).enumerate() {
            prop_assert_eq!(row[0].parse::<usize>().unwrap(), k);
            prop_assert_eq!(row[1].parse::<f64>().unwrap(), w.x);
            prop_assert_eq!(row[2].parse::<f64>().unwrap(), w.y);
            prop_assert_eq!(row[3].parse::<f64>().unwrap(), w.angle);
        }
    }
}
