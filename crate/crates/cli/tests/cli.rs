use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use idealface::metrics::compute_metrics;
use idealface_cli::commands::design_spec;
use idealface_cli::config::ExperimentConfig;
use idealface_cli::output::{metrics_path, pattern_path, read_json, read_pattern, MetricsFile};

const SMALL_DESIGN: &str = r#"
experiment = "small"

[array]
n = 10
spacing = 0.5

[design]
passbands = [[-20.0, 20.0]]
transition = 5.0
grid_step = 0.5
nulls = [40.0, -55.0, 70.0]
desired_level = 3.0
power = "total"
"#;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idealface")).args(args).current_dir(dir).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn design_files_reload_bit_for_bit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), SMALL_DESIGN);
    let out = run(&["design", "--config", &cfg_path, "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let dir = tmp.path().join("o");
    let saved: MetricsFile = read_json(&metrics_path(&dir, "small", "proposed")).unwrap();
    let (angles, db) = read_pattern(&pattern_path(&dir, "small", "proposed")).unwrap();

    let cfg = ExperimentConfig::parse(SMALL_DESIGN).unwrap();
    let (spec, _, _) = design_spec(&cfg).unwrap();
    assert_eq!(angles, spec.grid.angles());
    let lin: Vec<f64> = db.iter().map(|&d| 10f64.powf(d / 10.0)).collect();
    let again = compute_metrics(&lin, &spec.grid, &spec.desired_pattern()).unwrap();
    assert_eq!(again, saved.metrics);
    assert_eq!(saved.w_columns, Some(7));
    assert!(saved.nulls.iter().all(|n| n.depth_db < -100.0), "{:?}", saved.nulls);
}

#[test]
fn repeated_runs_write_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), &format!("{SMALL_DESIGN}\n[subspace]\ntrials = 5\n"));
    for dir in ["a", "b"] {
        for cmd in ["design", "subspace", "gsc"] {
            let out = run(&[cmd, "--config", &cfg_path, "--out", dir, "--seed", "7"], tmp.path());
            assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
    let mut names: Vec<_> = fs::read_dir(tmp.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        let a = fs::read(tmp.path().join("a").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
}

#[test]
fn seed_override_changes_trials() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), "experiment = \"s\"\n[subspace]\ntrials = 3\n");
    for (dir, seed) in [("a", "1"), ("b", "2")] {
        assert!(run(&["subspace", "--config", &cfg_path, "--out", dir, "--seed", seed], tmp.path()).status.success());
    }
    let a = fs::read(tmp.path().join("a/s_trials.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/s_trials.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn bad_config_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), "[design]\nnull_dirs = [10.0]\n");
    let out = run(&["design", "--config", &cfg_path], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("null_dirs"));

    // design needs nulls
    let out = run(&["design"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unsolved_design_exits_with_two_and_keeps_files() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL_DESIGN}\n[solver]\nmax_iter = 2\n");
    let cfg_path = write_config(tmp.path(), &text);
    let out = run(&["design", "--config", &cfg_path, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(metrics_path(&tmp.path().join("o"), "small", "proposed").exists());
}

#[test]
fn gsc_report_blocks_configured_directions() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), "[gsc]\nm = 12\nblocked = [-30.0, 10.0]\nprobes = [-30.0, 10.0, 50.0]\n");
    assert!(run(&["gsc", "--config", &cfg_path, "--out", "o"], tmp.path()).status.success());
    let rep: serde_json::Value = read_json(&tmp.path().join("o/gsc_blocking_report.json")).unwrap();
    assert_eq!(rep["rows"], 10);
    assert!(rep["blocked_residual"].as_f64().unwrap() <= 1e-10 * 12.0);
    let probes = rep["probes"].as_array().unwrap();
    assert!(probes[2][1].as_f64().unwrap() > 1e-3);
}

#[test]
fn shipped_configs_parse_and_match_reference_setups() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["example1", "example2", "design", "subspace"] {
        ExperimentConfig::load(&dir.join(format!("{name}.toml"))).unwrap();
    }
    let e1 = ExperimentConfig::load(&dir.join("example1.toml")).unwrap();
    assert_eq!(e1.sector_setup().unwrap().spec().unwrap().desired_level, 5.0);
    let mut want = idealface::experiments::SectorSetup { desired_level: Some(5.0), ..Default::default() };
    let mut got = e1.sector_setup().unwrap();
    got.null_dirs.sort_by(f64::total_cmp);
    want.null_dirs.sort_by(f64::total_cmp);
    assert_eq!(got, want);
    let e2 = ExperimentConfig::load(&dir.join("example2.toml")).unwrap();
    assert_eq!(e2.blocked_setup().unwrap(), idealface::experiments::BlockedSetup::default());
}
