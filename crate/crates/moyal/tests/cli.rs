use std::path::PathBuf;

use moyal::cli::{run, EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE};
use serde_json::Value;

fn out_dir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_writes_rows() {
    let dir = out_dir("spectrum");
    let code = run(["mf", "spectrum", "--model", "morse", "--grid", "512,-4,20,1", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let report = json(dir.join("spectrum.json"));
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4]["E_shape_invariance"].as_f64().unwrap(), 24.0);
    assert!(rows.iter().all(|r| r["rel_error"].as_f64().unwrap() < 1e-6));
}

#[test]
fn impossible_tolerance_exits_one() {
    let dir = out_dir("strict");
    let code = run(["mf", "spectrum", "--tolerance", "1e-300", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_TOLERANCE);
    assert_eq!(json(dir.join("spectrum.json"))["pass"], Value::Bool(false));
}

#[test]
fn polynomial_star_is_exact() {
    let dir = out_dir("star");
    assert_eq!(run(["mf", "star", "x^2", "p^2", "--out", dir.to_str().unwrap()]), EXIT_OK);
    let report = json(dir.join("star.json"));
    assert_eq!(report["method"], "exactpoly");
    let br = &report["bracket"]["terms"];
    assert_eq!(br["x p hbar"]["im"].as_f64().unwrap(), 4.0);
    assert_eq!(br.as_object().unwrap().len(), 1);
    let ab = &report["a_star_b"]["terms"];
    assert_eq!(ab["hbar^2"]["re"].as_f64().unwrap(), -0.5);
}

#[test]
fn sampled_star_exports_fields() {
    let dir = out_dir("star_sampled");
    let code = run([
        "mf", "star", "exp(-x^2-p^2)", "exp(-(x-1)^2-p^2)", "--grid", "64,-8,8,1", "--format", "bin",
        "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    for stem in ["star_ab", "star_ba", "bracket"] {
        assert!(dir.join(format!("{stem}.bin")).exists());
    }
    assert_eq!(json(dir.join("star.json"))["method"], "kernel");
}

#[test]
fn custom_superpotential_from_config_file() {
    let dir = out_dir("custom");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("run.conf");
    std::fs::write(
        &config,
        "# Morse written by hand\nmodel = custom\nw = a - b*exp(-x)\nb = 1\na0 = 5\nstep = 1\nn_bound = 4\ngrid = 512,-4,20,1\n",
    )
    .unwrap();
    let code = run(["mf", "verify", "--config", config.to_str().unwrap(), "--nmax", "2", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(dir.join("verify.json"))["pass"], Value::Bool(true));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(["mf"]), EXIT_USAGE);
    assert_eq!(run(["mf", "wigner", "--grid", "12,-8,8,1"]), EXIT_USAGE);
    assert_eq!(run(["mf", "wigner", "--model", "morse", "--nmax", "9"]), EXIT_USAGE);
    assert_eq!(run(["mf", "spectrum", "--param", "omega"]), EXIT_USAGE);
    assert_eq!(run(["mf", "spectrum", "--format", "xml"]), EXIT_USAGE);
    assert_eq!(run(["mf", "verify", "--config", "/nonexistent/run.conf"]), EXIT_USAGE);
}
