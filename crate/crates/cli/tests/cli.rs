use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sfmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfmlab"))
        .args(args)
        .env("SFMLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn simulate(dir: &TempDir, class: &str, n: &str, m: &str, seed: &str) -> (String, String, String) {
    let (scene, meas, init) = (path_str(dir, "truth.json"), path_str(dir, "meas.json"), path_str(dir, "init.json"));
    let o = sfmlab(&[
        "simulate", class, n, m, "--seed", seed, "--scene", &scene, "--measurements", &meas, "--init", &init,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (scene, meas, init)
}

#[test]
fn catalog_rows() {
    let o = sfmlab(&["catalog"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 13);
    let row: Vec<&str> = text
        .lines()
        .find(|l| l.starts_with("omni-oriented-3d "))
        .unwrap()
        .split_whitespace()
        .collect();
    assert_eq!(row, ["omni-oriented-3d", "3", "2", "3", "4", "0", "dilation"]);

    let o = sfmlab(&["catalog", "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 13);
    assert_eq!(rows[0]["name"], "affine-ortho-2d");
}

#[test]
fn region_grid_matches_boundary_curve() {
    let dir = TempDir::new().unwrap();
    let (csv, svg) = (path_str(&dir, "r.csv"), path_str(&dir, "r.svg"));
    let o = sfmlab(&["region", "omni-oriented-2d", "6", "6", "--out", &csv, "--svg", &svg]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,m,lhs,rhs,slack,feasible"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 36);
    for r in &rows {
        let (n, m): (i64, i64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let infeasible = m * n - 2 * m - 2 * n + 3 < 0;
        assert_eq!(r[5] == "false", infeasible, "cell ({n},{m})");
    }
    let svg = std::fs::read_to_string(&svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("class=\"infeasible\""));

    let o = sfmlab(&["region", "line-3d", "8", "5"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("6,4,") && l.ends_with(",true")));
    assert_eq!(text.lines().count(), 41);
}

#[test]
fn region_rejects_bad_bounds_and_paths() {
    assert_eq!(sfmlab(&["region", "line-3d", "1001", "3"]).status.code(), Some(2));
    let o = sfmlab(&["region", "line-3d", "3", "3", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rank_exit_codes() {
    let o = sfmlab(&["rank", "affine-ortho-3d", "3", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["rank"], 18);
    assert_eq!(report["deficit"], 0);
    assert_eq!(report["prediction"], 18);

    let o = sfmlab(&["rank", "affine-ortho-3d", "6", "2", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["deficit"].as_u64().unwrap() >= 1);

    let o = sfmlab(&["rank", "fisheye-3d", "3", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fisheye-3d"));
}

fn summary_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn reconstruct_round_trip() {
    let dir = TempDir::new().unwrap();
    let (truth, meas, init) = simulate(&dir, "omni-oriented-2d", "3", "3", "4");
    let out = path_str(&dir, "out.json");
    let o = sfmlab(&["reconstruct", &meas, &init, &out, "--truth", &truth]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(summary_value(&text, "align_rmse") < 1e-6);
    assert!(text.contains("converged true"));
    assert!(Path::new(&out).exists());
}

#[test]
fn reconstruct_circle_scene() {
    let dir = TempDir::new().unwrap();
    let (_, meas, init) = simulate(&dir, "circle", "7", "6", "2");
    let out = path_str(&dir, "out.json");
    let o = sfmlab(&["reconstruct", &meas, &init, &out, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["rmse"].as_f64().unwrap() < 1e-9);
}

#[test]
fn reconstruct_errors() {
    let dir = TempDir::new().unwrap();
    let (_, meas, init) = simulate(&dir, "omni-oriented-2d", "3", "3", "1");
    let out = path_str(&dir, "out.json");

    let broken = path_str(&dir, "broken.json");
    std::fs::write(&broken, "{\"version\": \"sfmlab/1\", \"class\":").unwrap();
    assert_eq!(sfmlab(&["reconstruct", &meas, &broken, &out]).status.code(), Some(2));
    assert_eq!(sfmlab(&["reconstruct", &broken, &init, &out]).status.code(), Some(2));

    let (_, meas, init) = simulate(&dir, "affine-ortho-2d", "5", "2", "1");
    let o = sfmlab(&["reconstruct", &meas, &init, &out]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("inequality") && err.contains("slack"), "{err}");
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (scene, meas, _) = simulate(&dir, "circle", "7", "6", "9");
    let first = (std::fs::read(&scene).unwrap(), std::fs::read(&meas).unwrap());
    let file: serde_json::Value = serde_json::from_slice(&first.1).unwrap();
    let values: usize = file["data"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(|c| c.as_array().unwrap().len()).sum::<usize>())
        .sum();
    assert_eq!(values, 42);

    simulate(&dir, "circle", "7", "6", "9");
    assert_eq!(first.0, std::fs::read(&scene).unwrap());
    assert_eq!(first.1, std::fs::read(&meas).unwrap());

    let o = sfmlab(&["simulate", "omni-2d", "0", "3", "--scene", &scene, "--measurements", &meas]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn written_scene_round_trips_byte_identically() {
    let dir = TempDir::new().unwrap();
    let (truth, meas, init) = simulate(&dir, "perspective-3d", "7", "2", "5");
    let out = path_str(&dir, "out.json");
    sfmlab(&["reconstruct", &meas, &init, &out]);
    for path in [&truth, &meas, &out] {
        let text = std::fs::read_to_string(path).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["version"], "sfmlab/1");
    }
    // reading the reconstruction as an initial scene and writing it again keeps every byte
    let again = path_str(&dir, "again.json");
    let o = sfmlab(&["reconstruct", &meas, &out, &again]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
    let file: sfmlab_cli::SceneFile = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sfmlab_cli::to_json(&file).unwrap(), std::fs::read_to_string(&out).unwrap());
}
