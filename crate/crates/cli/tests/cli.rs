use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aniso_symm::aniso_fd::{solve_fd, AnisoProblem};
use aniso_symm::symmetrize::{read_grid_function, GridSidecar};
use aniso_symm_cli::config::{parse, SolveAnisoConfig};
use aniso_symm_cli::output::config_hash;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(cmd: &str, config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aniso-symm"))
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"phi":{"family":"power_sum","lambda":[1,1],"p":[2,4]},"typo":1}"#);
    let out = run("klimov", &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out/phi_diamond.csv").exists());
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", &dir.path().join("nope.json"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_young_function_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"phi":{"family":"power_sum","lambda":[1,1],"p":[2,0.5]}}"#);
    assert_eq!(run("klimov", &cfg, dir.path()).status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), r#"{"suites":[]}"#);
    let out = run("verify", &empty, dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 checks"));

    let torsion = write_config(dir.path(), r#"{"suites":["torsion"]}"#);
    assert_eq!(run("verify", &torsion, dir.path()).status.code(), Some(0));

    let perturbed = write_config(dir.path(), r#"{"suites":["torsion"],"perturbation":0.01}"#);
    assert_eq!(run("verify", &perturbed, dir.path()).status.code(), Some(1));
}

#[test]
fn hypothesis_violation_exits_4_without_solving() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("solve-radial", &configs().join("solve_radial_h6.json"), dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(!dir.path().join("radial.csv").exists());
    assert!(dir.path().join("hypotheses.json").exists());
}

#[test]
fn outputs_carry_config_hash_and_are_deterministic() {
    let cfg = configs().join("solve_radial_torsion.json");
    let hash = config_hash(&std::fs::read_to_string(&cfg).unwrap());
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run("solve-radial", &cfg, a.path()).status.code(), Some(0));
    assert_eq!(run("solve-radial", &cfg, b.path()).status.code(), Some(0));
    let csv_a = std::fs::read(a.path().join("radial.csv")).unwrap();
    let csv_b = std::fs::read(b.path().join("radial.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let first = String::from_utf8(csv_a).unwrap().lines().next().unwrap().to_string();
    assert_eq!(first, format!("# config_sha256={hash}"));
    assert_eq!(json(&a.path().join("radial.json"))["config_sha256"], hash.as_str());
}

#[test]
fn compare_outputs_are_deterministic() {
    let cfg = configs().join("compare_zero.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run("compare", &cfg, a.path()).status.code(), Some(0));
    assert_eq!(run("compare", &cfg, b.path()).status.code(), Some(0));
    let name = "zero_n32_margin.csv";
    assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    let report = json(&a.path().join("zero_n32.json"));
    assert_eq!(report["result"]["report"]["sup_b_minus_b_tilde"], 0.0);
    assert_eq!(report["result"]["passed"], true);
}

#[test]
fn klimov_diagnostics_recover_harmonic_mean() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("klimov", &configs().join("klimov_p24.json"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let d = &json(&dir.path().join("klimov.json"))["result"];
    let p = d["fitted_exponent"].as_f64().unwrap();
    assert!((p - 8.0 / 3.0).abs() < 0.02 * 8.0 / 3.0, "{p}");
    let (k1, k2) = (d["k1"].as_f64().unwrap(), d["k2"].as_f64().unwrap());
    assert!(0.0 < k1 && k1 <= k2, "{k1} {k2}");
    // a power sum is separable, so the product-inverse fit is reported too
    assert!(d["product_inverse"]["max_relative_deviation"].as_f64().unwrap() < 0.1);
}

#[test]
fn klimov_radial_exponent() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("klimov", &configs().join("klimov_radial.json"), dir.path()).status.code(), Some(0));
    let p = json(&dir.path().join("klimov.json"))["result"]["fitted_exponent"].as_f64().unwrap();
    assert!((p - 2.0).abs() < 1e-3, "{p}");
}

#[test]
fn separable_klimov_reports_product_inverse_fit() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("klimov", &configs().join("klimov_separable.json"), dir.path()).status.code(), Some(0));
    let fit = &json(&dir.path().join("klimov.json"))["result"]["product_inverse"];
    let dev = fit["max_relative_deviation"].as_f64().unwrap();
    assert!(dev < 0.1, "{dev}");
    assert!(fit["constant"].as_f64().unwrap() > 0.0);
}

#[test]
fn solve_aniso_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = configs().join("solve_aniso_disk.json");
    assert_eq!(run("solve-aniso", &cfg_path, dir.path()).status.code(), Some(0));
    let sidecar: GridSidecar = serde_json::from_value(json(&dir.path().join("u.sidecar.json"))["result"].clone()).unwrap();
    let read = read_grid_function(std::fs::File::open(dir.path().join("u.csv")).unwrap(), &sidecar).unwrap();

    let cfg: SolveAnisoConfig = parse(&std::fs::read_to_string(&cfg_path).unwrap()).unwrap();
    let f = cfg.data.sample(&cfg.domain, cfg.n).unwrap();
    let p = AnisoProblem::new(f, cfg.lambda, cfg.p, cfg.b).unwrap();
    let sol = solve_fd(&p, &cfg.settings).unwrap();
    assert_eq!(read.mask(), sol.u.mask());
    for (a, b) in read.values().iter().zip(sol.u.values()) {
        assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-300), "{a} {b}");
    }
}

#[test]
fn compare_torsion_case_passes_with_small_margin() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("compare", &configs().join("compare_torsion.json"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&dir.path().join("compare.json"))["result"].clone();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r["sup_b_minus_b_tilde"].as_f64().unwrap() <= r["tol_disc"].as_f64().unwrap());
    }
}
