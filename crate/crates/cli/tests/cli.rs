use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};
use surfspin_cli::output::{verify_json, verify_text};

fn run(args: &[&str], config: &str, dir: &Path) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, format!("out = {:?}\n{config}", dir.join("out"))).unwrap();
    Command::new(env!("CARGO_BIN_EXE_surfspin"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

/// Data rows of a sealed CSV as (header, rows).
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn sphere_geometry_has_zero_potential() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["geometry"], "[chart]\nname = \"sphere\"\n[grid]\nn = [12, 24]\n", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(dir.path(), "geometry.csv");
    assert!(verify_text(&text));
    let (h, rows) = csv_rows(&text);
    let vg = column(&h, "v_g");
    assert_eq!(rows.len(), 12 * 24);
    assert!(rows.iter().all(|r| r[vg].abs() < 1e-12));
    assert!(verify_json(&read(dir.path(), "geometry.json")));
}

#[test]
fn torus_geometry_outer_equator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[chart]\nname = \"torus\"\nparams = { R0 = 2.0, r = 1.0 }\n[grid]\nn = [16, 8]\n";
    let o = run(&["geometry"], cfg, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&read(dir.path(), "geometry.csv"));
    let (q1, vg) = (column(&h, "q1"), column(&h, "v_g"));
    let outer: Vec<_> = rows.iter().filter(|r| (r[q1] - PI / 2.0).abs() < 1e-12).collect();
    assert_eq!(outer.len(), 8);
    assert!(outer.iter().all(|r| (r[vg] + 1.0 / 18.0).abs() < 1e-12));
}

#[test]
fn plane_geometry_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["geometry"], "[chart]\nname = \"plane\"\n[grid]\nn = [8, 8]\n", dir.path());
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&read(dir.path(), "geometry.csv"));
    for name in ["v_g", "mean_curvature", "gaussian_curvature"] {
        let c = column(&h, name);
        assert!(rows.iter().all(|r| r[c] == 0.0), "{name}");
    }
}

const SPHERE_SPINLESS: &str = "[chart]\nname = \"sphere\"\n[field]\npreset = \"zero\"\n[grid]\nn = [24, 48]\n[solver]\nk = 9\nspinless = true\n";

#[test]
fn sphere_spinless_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum"], SPHERE_SPINLESS, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "spectrum.json")).unwrap();
    let ev: Vec<f64> = doc["eigenvalues"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let exact = [0.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0, 3.0, 3.0];
    for (e, x) in ev.iter().zip(exact) {
        assert!((e - x).abs() < 1e-2, "{e} vs {x}");
    }
    assert_eq!(doc["converged"], true);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[chart]\nname = \"cylinder\"\n[field]\nB0 = 0.3\n[grid]\nn = [16, 16]\n[solver]\nk = 4\n";
    let mut docs = Vec::new();
    for _ in 0..2 {
        let o = run(&["spectrum"], cfg, dir.path());
        assert_eq!(o.status.code(), Some(0));
        docs.push((read(dir.path(), "spectrum.json"), read(dir.path(), "eigenfield_000.csv")));
    }
    assert_eq!(docs[0], docs[1]);
    let (json, field) = &docs[0];
    assert!(verify_json(json));
    assert!(verify_text(field));
    assert!(json.contains("\"converged\": true"));
    assert!(!verify_json(&json.replacen("\"converged\": true", "\"converged\": false", 1)));
    let last = field.lines().last().unwrap();
    assert!(!verify_text(&field.replacen(last, &last.replacen('0', "1", 1), 1)));
}

#[test]
fn cylinder_flux_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[chart]\nname = \"cylinder\"\n[field]\nB0 = 0.3\n[grid]\nn = [16, 16]\n[solver]\nk = 4\n";
    let o = run(&["spectrum"], cfg, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "spectrum.json")).unwrap();
    assert!((doc["params"]["flux"]["flux_shift"].as_f64().unwrap() - 0.15).abs() < 1e-14);
}

#[test]
fn seed_flag_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["geometry", "--seed", "17"], "[chart]\nname = \"plane\"\n[grid]\nn = [8, 8]\n", dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "geometry.json")).unwrap();
    assert_eq!(doc["config"]["solver"]["seed"], 17);
}

#[test]
fn default_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check"], "[field]\nB0 = 0.7\nB1 = 0.4\n", dir.path());
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.contains("INFO"));
    for chart in ["sphere", "cylinder", "torus"] {
        assert!(text.contains(&format!("PASS {chart}/oracle/kinetic")));
    }
    assert!(verify_text(&read(dir.path(), "check.txt")));
    assert!(verify_json(&read(dir.path(), "check.json")));
}

#[test]
fn corrupted_sign_fails_with_its_tag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[field]\nB0 = 0.7\nB1 = 0.4\n[check]\ncharts = [\"sphere\"]\ncorrupt_sign = \"magnetic_quadratic\"\n";
    let o = run(&["check"], cfg, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL sphere/oracle/magnetic_quadratic"));
}

#[test]
fn oracle_compare_on_torus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[chart]\nname = \"torus\"\n[field]\nB0 = 0.5\nB1 = 0.2\n";
    let o = run(&["oracle-compare"], cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(verify_json(&read(dir.path(), "oracle.json")));
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("geometry", "bogus = 1\n"),
        ("geometry", "[chart]\nname = \"klein\"\n"),
        ("spectrum", "[chart]\nname = \"sphere\"\n[grid]\nn = [8, 16]\n[solver]\nk = 200\n"),
        ("oracle-compare", "[chart]\nname = \"plane\"\n"),
        ("spectrum", "[chart]\nname = \"sphere\"\n[units]\nhbar = 0.0\n"),
        ("spectrum", "[chart]\nname = \"sphere\"\n[field]\npreset = \"cylinder_mixed\"\n"),
    ];
    for (cmd, cfg) in cases {
        let o = run(&[cmd], cfg, dir.path());
        assert_eq!(o.status.code(), Some(2), "{cmd} {cfg}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = Command::new(env!("CARGO_BIN_EXE_surfspin")).arg("geometry").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn normal_gauge_needs_thin_layer_gauge() {
    let dir = tempfile::tempdir().unwrap();
    let field = "[field]\npreset = \"custom\"\na = [\"0\", \"0\", \"0.3 * cos(q1)\"]\n";
    let base = format!("[chart]\nname = \"sphere\"\n{field}[grid]\nn = [8, 16]\n");
    let o = run(&["export-matrix"], &base, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("thin_layer_gauge"));
    let fixed = format!("[chart]\nname = \"sphere\"\n{field}thin_layer_gauge = true\n[grid]\nn = [8, 16]\n");
    let o = run(&["export-matrix"], &fixed, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unconverged_solve_exits_three_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[chart]\nname = \"sphere\"\n[grid]\nn = [8, 16]\n[solver]\nk = 4\ntol = 1e-300\n";
    let o = run(&["spectrum"], cfg, dir.path());
    assert_eq!(o.status.code(), Some(3));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "spectrum.json")).unwrap();
    assert_eq!(doc["converged"], false);
}

#[test]
fn exported_matrix_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["export-matrix"], "[chart]\nname = \"torus\"\n[grid]\nn = [8, 16]\n", dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = read(dir.path(), "matrix.txt");
    assert!(verify_text(&text));
    let m = surfspin::solver::io::read_matrix_triplets(std::io::Cursor::new(text)).unwrap();
    assert_eq!(m.n, 2 * 8 * 16);
    for r in 0..m.n {
        for (c, v) in m.row(r) {
            assert!((m.get(c, r) - v.conj()).norm() < 1e-12 * (1.0 + v.norm()));
        }
    }
    let weights = read(dir.path(), "weights.csv");
    assert!(verify_text(&weights));
}
