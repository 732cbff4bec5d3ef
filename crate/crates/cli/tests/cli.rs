use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

// Golden values carry five decimals; the solver settings behind the second
// column are unknown, hence the looser bound.
const TOL_GOLDEN_WKB: f64 = 5e-5;
const TOL_GOLDEN_SCHRODINGER: f64 = 1e-3;

fn pdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdm"))
        .args(args)
        .output()
        .expect("pdm runs")
}

fn stdout(args: &[&str]) -> String {
    let out = pdm(args);
    assert!(
        out.status.success(),
        "pdm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn table(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn wkb_compare_matches_golden_table() {
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sinh2_levels.csv"))
        .unwrap();
    let text = stdout(&["wkb-compare", "--potential", "sinh2", "--levels", "10"]);
    assert_eq!(text.lines().next(), golden.lines().next());
    let (got, want) = (table(&text), table(&golden));
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g[0], w[0]);
        assert!((g[1] - w[1]).abs() <= TOL_GOLDEN_WKB, "k={} wkb {} vs {}", g[0], g[1], w[1]);
        assert!(
            (g[2] - w[2]).abs() <= TOL_GOLDEN_SCHRODINGER,
            "k={} schrodinger {} vs {}",
            g[0],
            g[2],
            w[2]
        );
    }
}

#[test]
fn regular_harmonic_spectrum() {
    let text = stdout(&["spectrum", "--family", "regular", "--potential", "harmonic", "--levels", "10"]);
    let rows = table(&text);
    assert_eq!(rows.len(), 10);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], k as f64);
        assert!((r[1] - (k as f64 + 0.5)).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn coherent_json_moments() {
    let text = stdout(&["coherent", "--family", "regular", "--z", "1,0", "--format", "json"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["mean"].as_f64().unwrap(), 2.0);
    assert!((v["stddev"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-8);
    assert!((v["uncertainty_product"].as_f64().unwrap() - 0.5).abs() < 1e-4);
    let total: f64 = v["poisson"].as_array().unwrap().iter().map(|p| p["p"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-8);
    let x = v["density"]["x"].as_array().unwrap();
    assert_eq!(x.len(), v["density"]["value"].as_array().unwrap().len());
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["second-kind", "--family", "regular", "--levels", "4", "--format", "json", "--points", "21"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn numbers_carry_nine_significant_digits() {
    let text = stdout(&["wkb-compare", "--levels", "3"]);
    for field in text.lines().skip(1).flat_map(|l| l.split(',').skip(1).map(str::to_owned).collect::<Vec<_>>()) {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 9, "{field}");
    }
}

#[test]
fn emitted_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = stdout(&[
        "coherent", "--family", "singular-n", "--n", "2", "--z", "0.5,-1.5", "--format", "json", "--emit-config",
    ]);
    let path = dir.path().join("run.json");
    std::fs::write(&path, &first).unwrap();
    let second = stdout(&["--config", path.to_str().unwrap(), "--emit-config"]);
    assert_eq!(first, second);
    let v: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["command"], "coherent");
    assert_eq!(v["z"], serde_json::json!([0.5, -1.5]));

    let from_flags = stdout(&["coherent", "--family", "singular-n", "--n", "2", "--z", "0.5,-1.5", "--format", "json"]);
    let from_file = stdout(&["--config", path.to_str().unwrap()]);
    assert_eq!(from_flags, from_file);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("levels.csv");
    let out = pdm(&["first-kind", "--family", "singular0", "--levels", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rows = table(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r[1], r[0] + 0.5);
        assert!((r[2] - r[1]).abs() < 1e-6);
    }
}

#[test]
fn domain_errors_exit_with_two() {
    let out = pdm(&["second-kind", "--family", "singular0", "--potential", "harmonic"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain error"));

    let out = pdm(&["spectrum", "--family", "quadratic-c", "--c", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_one() {
    let out = pdm(&["--config", "/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ladder_reports_coefficient() {
    let text = stdout(&["ladder", "--k", "4", "--direction", "lower", "--format", "json", "--points", "11"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!((v["coefficient"].as_f64().unwrap() - 8f64.sqrt()).abs() < 1e-5);
    assert_eq!(v["wave"]["grid"].as_array().unwrap().len(), 11);

    let out = pdm(&["ladder", "--k", "1", "--grid-points", "501"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn catalog_lists_every_family() {
    let text = stdout(&["catalog", "--format", "json"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().any(|r| r["mappable"] == false));
}

#[test]
fn eigenfunction_in_x_is_normalized() {
    let text = stdout(&["eigenfunction", "--family", "regular", "--k", "1", "--space", "x", "--points", "4001"]);
    let rows = table(&text);
    let mut norm = 0.0;
    for w in rows.windows(2) {
        norm += 0.5 * (w[1][0] - w[0][0]) * (w[0][1].powi(2) + w[1][1].powi(2));
    }
    assert!((norm - 1.0).abs() < 1e-3, "{norm}");
}
