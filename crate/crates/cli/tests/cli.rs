use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qetu(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qetu")).current_dir(dir).args(args).output().expect("spawn qetu")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = qetu(dir, args);
    assert!(out.status.success(), "qetu {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let head = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (head, rows)
}

fn error_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim().lines().last().unwrap()).unwrap_or_else(|_| panic!("stderr is not a JSON record: {text}"))
}

#[test]
fn bounds_are_nested() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["bounds", "--model", "tfim", "--sites", "3", "--g", "0.7"]);
    let (head, rows) = csv_rows(&d.path().join("bounds.csv"));
    assert_eq!(head, ["method", "e0_lower", "emax_upper", "width", "t", "sigma"]);
    assert_eq!(rows.len(), 3);
    let w: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(w[2] <= w[1] + 1e-12 && w[1] <= w[0] + 1e-12, "{w:?}");
}

#[test]
fn phases_writes_curve_and_phase_file() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["phases", "--model", "tfim", "--sites", "3", "--degree", "30", "--tau", "1", "--points", "50", "--out", "p"]);
    let (head, rows) = csv_rows(&d.path().join("p.csv"));
    assert_eq!(head, ["x", "energy", "target", "expansion", "response"]);
    assert_eq!(rows.len(), 50);
    for r in &rows {
        let (e, f): (f64, f64) = (r[3].parse().unwrap(), r[4].parse().unwrap());
        assert!((e - f).abs() < 1e-5, "{r:?}");
    }
    assert!(d.path().join("p.phases").exists());
    let j = read_json(&d.path().join("p.json"));
    assert!(j["summary"]["verify_residual"].as_f64().unwrap() < 1e-5);
    assert_eq!(j["config"]["degree"], 30);
}

#[test]
fn groundstate_energy_decreases_and_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let args = ["groundstate", "--model", "tfim", "--sites", "3", "--degree", "40", "--tau-max", "2", "--tau-step", "0.5", "--shots", "64", "--seed", "9"];
    ok(d.path(), &[&args[..], &["--out", "a"]].concat());
    ok(d.path(), &[&args[..], &["--out", "b"]].concat());
    let a = std::fs::read(d.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.path().join("b.csv")).unwrap());
    let (head, rows) = csv_rows(&d.path().join("a.csv"));
    assert_eq!(head, ["tau", "energy", "exact_energy", "energy_error", "success_prob", "gates", "two_qubit_gates"]);
    assert_eq!(rows.len(), 5);
    let e: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    let ja = read_json(&d.path().join("a.json"));
    let jb = read_json(&d.path().join("b.json"));
    assert_eq!(ja["summary"]["samples"], jb["summary"]["samples"]);
    let total: u64 = ja["summary"]["samples"]["counts"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 64);
}

#[test]
fn fragmented_and_filter_modes_run() {
    let d = tempfile::tempdir().unwrap();
    let base = ["groundstate", "--model", "tfim", "--sites", "3", "--degree", "40", "--tau-max", "2"];
    ok(d.path(), &[&base[..], &["--mode", "fragmented", "--delta-tau", "1", "--out", "f"]].concat());
    let (_, rows) = csv_rows(&d.path().join("f.csv"));
    assert_eq!(rows.len(), 3);
    let g: Vec<u64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert_eq!(g[2], 2 * g[1]);
    ok(d.path(), &[&base[..], &["--mode", "filter", "--dump-state", "s.bin", "--out", "h"]].concat());
    let (_, rows) = csv_rows(&d.path().join("h.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0][0].is_empty());
    assert!(rows[0][3].parse::<f64>().unwrap().abs() < 0.05);
    assert!(d.path().join("s.bin").exists());
}

#[test]
fn gibbs_grid_matches_oracle() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gibbs", "--sites", "2", "--g", "0.5,2", "--beta", "0.5,1", "--degree", "20"]);
    let (head, rows) = csv_rows(&d.path().join("gibbs.csv"));
    assert_eq!(head.len(), 13);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let td: f64 = r[10].parse().unwrap();
        assert!(td < 0.05, "{r:?}");
    }
}

#[test]
fn lindblad_tracks_exact_populations() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["lindblad", "--gamma", "0.2", "--omega", "0.3", "--steps", "4"]);
    let (head, rows) = csv_rows(&d.path().join("lindblad.csv"));
    assert_eq!(head, ["step", "time", "pop_0", "pop_1", "exact_pop_0", "exact_pop_1", "cumulative_success"]);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        let p: Vec<f64> = r[2..6].iter().map(|x| x.parse().unwrap()).collect();
        assert!((p[0] - p[2]).abs() < 0.03 && (p[1] - p[3]).abs() < 0.03, "{r:?}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("run.cfg"), "# small run\nmodel = tfim\nsites = 3\ndegree = 20\npoints = 11\n").unwrap();
    ok(d.path(), &["phases", "--config", "run.cfg", "--degree", "24", "--out", "c"]);
    let j = read_json(&d.path().join("c.json"));
    assert_eq!(j["config"]["degree"], 24);
    assert_eq!(j["config"]["points"], 11);
    assert_eq!(j["config"]["model"]["sites"], 3);
}

#[test]
fn hamiltonian_round_trips_through_file_model() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["bounds", "--model", "hubbard", "--sites", "2", "--dump-hamiltonian", "h.txt", "--out", "a"]);
    ok(d.path(), &["bounds", "--model", "file", "--hamiltonian-file", "h.txt", "--out", "b"]);
    assert_eq!(std::fs::read(d.path().join("a.csv")).unwrap(), std::fs::read(d.path().join("b.csv")).unwrap());
}

#[test]
fn config_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["phases", "--no-such-flag"][..],
        &["phases", "--model", "tfim", "--sites", "3", "--degree", "7"],
        &["groundstate", "--model", "tfim", "--sites", "3", "--initial", "99"],
        &["lindblad", "--dt", "-1"],
    ] {
        let out = qetu(d.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let rec = error_record(&out);
        assert_eq!(rec["status"], "error");
        assert_eq!(rec["exit_code"], 2);
    }
}

#[test]
fn convergence_failure_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let out = qetu(d.path(), &["phases", "--model", "tfim", "--sites", "3", "--degree", "60", "--tau", "3", "--max-iter", "1", "--tol", "1e-14"]);
    assert_eq!(out.status.code(), Some(3));
    let rec = error_record(&out);
    assert_eq!(rec["kind"], "convergence");
    assert!(rec["best_residual"].as_f64().unwrap() > 0.0);
}
