use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bergman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn report(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn error_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is a JSON error");
    v["error"]["code"].as_str().unwrap().to_owned()
}

#[test]
fn norm_of_identity_function() {
    let dir = TempDir::new().unwrap();
    let z = write(dir.path(), "z.json", r#"{"kind":"taylor","coeffs":[[0,0],[1,0]]}"#);
    let v = report(&bergman(&["norm", "--p", "2", "--fn", &z]));
    assert_eq!(v["schema_version"], 1);
    let norm = v["result"]["norm"].as_f64().unwrap();
    assert_eq!(format!("{norm:.5}"), "0.70711");
    assert!(v["thresholds"]["extrapolation_cuts"].is_array());
}

#[test]
fn malformed_function_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"kind":"taylor","coeffs":"oops"}"#);
    let out = bergman(&["norm", "--p", "2", "--fn", &bad]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_code(&out), "INPUT");
}

#[test]
fn distinct_exit_codes() {
    let out = bergman(&["carleson", "geometric", "--density-t", "0", "--p", "2", "--q", "1"]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(error_code(&out), "REGIME");

    let out = bergman(&["norm", "--p", "2", "--fn", "/nonexistent/f.json"]);
    assert_eq!(out.status.code(), Some(9));
    assert_eq!(error_code(&out), "IO");

    let out = bergman(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let outside = write(dir.path(), "k.json", r#"{"kind":"kernel","w":[1.5,0],"i":0,"s":2}"#);
    let out = bergman(&["norm", "--p", "2", "--fn", &outside]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_code(&out), "DOMAIN");
}

#[test]
fn alternating_identity_table() {
    let v = report(&bergman(&["kernelcheck", "bj", "--n", "6", "--beta", "2.5"]));
    assert!(v["result"]["max_relative"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 21);
}

#[test]
fn seeded_reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let args = [
            "kernelcheck",
            "combination",
            "--radii",
            "0,0.6",
            "--n-max",
            "2",
            "--draws",
            "5",
            "--angular-cap",
            "256",
            "--seed",
            "17",
            "--out",
            out_dir.to_str().unwrap(),
        ];
        let out = bergman(&args);
        report(&out);
        (out.stdout, out_dir)
    };
    let (first, a) = run("a");
    let (second, b) = run("b");
    assert_eq!(first, second);
    for name in ["kernelcheck-combination.json", "kernelcheck-combination-sweep.csv"] {
        let x = fs::read(a.join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn randomized_commands_require_a_seed() {
    let out = bergman(&["kernelcheck", "combination"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ode_solve_and_oracle() {
    let dir = TempDir::new().unwrap();
    let zero = r#"{"kind":"taylor","coeffs":[[0,0]]}"#;
    let problem = format!(
        r#"{{"g":[{zero},{zero}],"rhs":{{"kind":"taylor","coeffs":[[2,0]]}},"initial":[[0,0],[0,0]]}}"#
    );
    let path = write(dir.path(), "p.json", &problem);
    let out_dir = dir.path().join("out");
    let v = report(&bergman(&["ode", "solve", "--problem", &path, "--out", out_dir.to_str().unwrap()]));
    assert_eq!(v["result"]["certificate"]["iterations"], 1);
    let csv = fs::read_to_string(out_dir.join("ode-solve-coefficients.csv")).unwrap();
    assert!(csv.starts_with("k,re,im\n"));
    assert!(csv.contains("\n2,1,0\n"));

    let v = report(&bergman(&["ode", "oracle", "--problem", &path, "--degree", "4"]));
    let c = v["result"]["coefficients"].as_array().unwrap();
    assert_eq!(c[2][0].as_f64().unwrap(), 1.0);
}

#[test]
fn non_contracting_iteration_reports_divergence() {
    let dir = TempDir::new().unwrap();
    let problem = r#"{"g":[{"kind":"taylor","coeffs":[[50,0]]}],"rhs":{"kind":"taylor","coeffs":[[0,0]]},"initial":[[1,0]]}"#;
    let path = write(dir.path(), "p.json", problem);
    let out = bergman(&["ode", "solve", "--problem", &path]);
    assert_eq!(out.status.code(), Some(8));
    assert_eq!(error_code(&out), "DIVERGENCE");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["certificate"]["converged"], false);
    assert_eq!(v["result"]["certificate"]["sustained_non_contraction"], true);
}

#[test]
fn operator_application() {
    let dir = TempDir::new().unwrap();
    let op = write(
        dir.path(),
        "op.json",
        r#"{"type":"volterra","n":1,"symbols":[{"kind":"taylor","coeffs":[[0,0],[2,0]]}]}"#,
    );
    let one = write(dir.path(), "one.json", r#"{"kind":"taylor","coeffs":[[1,0]]}"#);
    let v = report(&bergman(&["volterra", "apply", "--op", &op, "--fn", &one]));
    let coeffs = v["result"]["result"]["coeffs"].as_array().unwrap();
    assert_eq!(coeffs[2][0].as_f64().unwrap(), 1.0);

    let cs = write(
        dir.path(),
        "cs.json",
        r#"{"type":"compsum","symbols":[{"kind":"taylor","coeffs":[[0,0]]},{"kind":"taylor","coeffs":[[1,0]]}],"phi":{"kind":"taylor","coeffs":[[0,0],[0.5,0]]}}"#,
    );
    let z2 = write(dir.path(), "z2.json", r#"{"kind":"taylor","coeffs":[[0,0],[0,0],[1,0]]}"#);
    let pts = write(dir.path(), "pts.csv", "z_re,z_im\n0.3,0.4\n-0.5,0.1\n");
    let v = report(&bergman(&["compsum", "apply", "--op", &cs, "--fn", &z2, "--points", &pts]));
    let values = v["result"]["values"].as_array().unwrap();
    assert!((values[0][0].as_f64().unwrap() - 0.3).abs() < 1e-15);
    assert!((values[1][1].as_f64().unwrap() - 0.1).abs() < 1e-15);

    let out = bergman(&["compsum", "apply", "--op", &op, "--fn", &z2, "--points", &pts]);
    assert_eq!(error_code(&out), "INPUT");
}

#[test]
fn lattice_export() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("lat");
    let v = report(&bergman(&["lattice", "--r", "1", "--r-max", "0.9", "--out", out_dir.to_str().unwrap()]));
    let count = v["result"]["points"].as_u64().unwrap() as usize;
    let csv = fs::read_to_string(out_dir.join("lattice-points.csv")).unwrap();
    assert!(csv.starts_with("# r=1,multiplicity_bound="));
    assert_eq!(csv.lines().count(), count + 2);
}
