use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lipquo::quotient::QuotientMap;
use lipquo::{Complex, Polynomial};
use serde_json::Value;

fn lipquo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipquo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SQUARE: &str = "coeffs = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]\n";
const CUBIC: &str = "coeffs = [[0.0, 0.0], [-3.0, 0.0], [0.0, 0.0], [1.0, 0.0]]\n";

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_square() {
    let dir = tempfile::tempdir().unwrap();
    let p = config(dir.path(), "sq.toml", SQUARE);
    let out = lipquo(&["analyze", "--poly", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let k = &v["polynomials"][0]["constants"];
    assert_eq!(k["r"], 0.5);
    assert_eq!(k["alpha"][0], 0.25);
    assert_eq!(k["R"], 2.0);
    assert_eq!(v["polynomials"][0]["critical_points"][0]["m"], 2);
    assert_eq!(v["seed"], lipquo::suite::DEFAULT_SEED);
}

#[test]
fn analyze_linear_and_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = config(dir.path(), "lin.json", r#"{"coeffs": [[1.0, 0.0], [1.0, 0.0]], "seed": 11}"#);
    let out = lipquo(&["analyze", "--poly", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["polynomials"][0]["note"], "linear short-circuit, h = id");
    assert_eq!(v["seed"], 11);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["coeffs = [[1.0], [1.0, 0.0]]\n", "coeffs = [[1.0, 0.0]]\n", "coeffs = 3\n", "seed = 1\n"] {
        let p = config(dir.path(), "bad.toml", body);
        let out = lipquo(&["analyze", "--poly", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}");
        assert!(!out.stderr.is_empty());
    }
    let p = config(dir.path(), "sq.toml", SQUARE);
    let out = lipquo(&["verify", "--poly", p.to_str().unwrap(), "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(lipquo(&["analyze", "--poly", missing.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn grid_rows_match_direct_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let p = config(dir.path(), "sq.toml", SQUARE);
    let csv = dir.path().join("grid.csv");
    let out = lipquo(&["grid", "--poly", p.to_str().unwrap(), "--grid", "-2,2,-2,2,100,100", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10_001);
    assert_eq!(lines[0], "z_re,z_im,F2_re,F2_im");
    let q = QuotientMap::build(&Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap()).unwrap();
    for line in lines.iter().skip(1).step_by(97) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let z = Complex::new(v[0], v[1]);
        let w = Complex::new(v[2], v[3]);
        assert_eq!(w, q.f2(z));
        // closed forms: ½|z|e^{2i arg z} in the critical ball, z² up to |z| = 2
        let t = z.norm();
        if t == 0.0 {
            assert_eq!(w, Complex::new(0.0, 0.0));
        } else if t <= 0.5 {
            assert!((w - 0.5 * z * z / t).norm() < 1e-12);
        } else if t <= 2.0 {
            assert!((w - z * z).norm() < 1e-12);
        }
    }
}

#[test]
fn grid_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = config(dir.path(), "sq.toml", SQUARE);
    let p = p.to_str().unwrap();
    assert_eq!(lipquo(&["grid", "--poly", p, "--grid", "1,1,-2,2,10,10"]).status.code(), Some(2));
    assert_eq!(lipquo(&["grid", "--poly", p, "--grid", "-2,2,-2,2,0,10"]).status.code(), Some(2));
    assert_eq!(lipquo(&["grid", "--poly", p]).status.code(), Some(2));
    let unwritable = dir.path().join("no/such/dir/grid.csv");
    let out = lipquo(&["grid", "--poly", p, "--grid", "-2,2,-2,2,4,4", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn grid_with_h2_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = config(dir.path(), "sq.toml", &format!("{SQUARE}[grid]\nx = [-1.0, 1.0]\ny = [0.0, 1.0]\nnx = 3\nny = 2\n"));
    let out = lipquo(&["grid", "--poly", p.to_str().unwrap(), "--with-h2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], "z_re,z_im,F2_re,F2_im,h2_re,h2_im");
    // z = 1 lies in the identity region
    assert_eq!(lines[3], "1,0,1,0,1,0");
}

#[test]
fn fiber_of_square() {
    let dir = tempfile::tempdir().unwrap();
    let p = config(dir.path(), "sq.toml", SQUARE);
    let out = lipquo(&["fiber", "--poly", p.to_str().unwrap(), "--target", "1,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    assert!((pts[0]["z"][0].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!((pts[1]["z"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(lipquo(&["fiber", "--poly", p.to_str().unwrap(), "--target", "1"]).status.code(), Some(2));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = config(dir.path(), "cubic.toml", CUBIC);
    let run = || lipquo(&["verify", "--poly", p.to_str().unwrap(), "--suite", "construction", "--seed", "5"]);
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["pass"], true);
    let records = v["records"].as_array().unwrap();
    let keys: Vec<(String, String)> = records
        .iter()
        .map(|r| (r["check"].as_str().unwrap().to_string(), r["input"].as_str().unwrap().to_string()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn demos_suite_runs_alone() {
    let out = lipquo(&["verify", "--suite", "demos"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let criteria = v["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 1);
    assert_eq!(criteria[0]["id"], 8);
}

#[test]
fn forced_constant_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let p = config(dir.path(), "cubic.toml", CUBIC);
    let analyzed = json(&lipquo(&["analyze", "--poly", p.to_str().unwrap()]));
    assert!(analyzed["polynomials"][0]["constant_chain"]["big_l"].as_f64().unwrap() > 0.0);
    // ten times the Lipschitz estimate of F2 for this polynomial (about 1.12e6)
    let out = lipquo(&["verify", "--poly", p.to_str().unwrap(), "--suite", "metric", "--force-c", "1.2e7"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    let failing: Vec<&Value> = v["records"].as_array().unwrap().iter().filter(|r| r["pass"] == false).collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().any(|r| r["witness"].is_string()));
}
