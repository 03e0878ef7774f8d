//! End-to-end runs of the `slipwave` binary on small grids.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: [&str; 4] = ["--set", "grid.nx=32", "--set", "grid.nz=24"];

fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn slipwave(dir: &Path, args: &[&str]) -> Output {
    let out_dir = format!("output.dir={}", dir.display());
    Command::new(env!("CARGO_BIN_EXE_slipwave"))
        .current_dir(dir)
        .args(["--set", &out_dir])
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(dir: &Path, stem: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json"))).unwrap()).unwrap()
}

fn csv_rows(dir: &Path, stem: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(dir.join(format!("{stem}.csv"))).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn symbols_from_minimal_config() {
    let dir = workdir("symbols");
    let cfg = write_config(&dir, "[params]\nsigma = 0.2\n[experiment]\nkind = \"symbols\"\nalphas = [0.1, 0.01]\n");
    let mut args = vec!["--config", &cfg];
    args.extend(SMALL);
    let o = slipwave(&dir, &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&dir, "symbols");
    assert_eq!(header, ["xi_1", "Re_m", "Im_m", "Re_rho", "Im_rho", "intV2", "V0sq", "intQm1sq", "alpha"]);
    // Nyquist skipped, one block per alpha.
    assert_eq!(rows.len(), 2 * 31);
    let s = summary(&dir, "symbols");
    assert_eq!(s["status"], "ok");
    assert_eq!(s["config"]["params"]["sigma"], 0.2);
    assert_eq!(s["config"]["grid"]["nx"], 32);
    assert_eq!(s["config"]["solver"]["max_iter"], 40);
    for a in s["result"]["alphas"].as_array().unwrap() {
        assert!(a["max_re_conj_m"].as_f64().unwrap() < 0.0);
    }
}

#[test]
fn solve_is_byte_for_byte_reproducible() {
    let dir = workdir("repro");
    let mut args = vec!["solve"];
    args.extend(SMALL);
    let o = slipwave(&dir, &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json = std::fs::read(dir.join("solve.json")).unwrap();
    let csv = std::fs::read(dir.join("solve.csv")).unwrap();
    let o = slipwave(&dir, &args);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(dir.join("solve.json")).unwrap(), json);
    assert_eq!(std::fs::read(dir.join("solve.csv")).unwrap(), csv);

    let s = summary(&dir, "solve");
    let trace = s["result"]["residual_trace"].as_array().unwrap();
    assert!(trace.len() >= 2);
    assert!(s["result"]["residual"].as_f64().unwrap() <= 1e-10 * s["result"]["forcing_norm"].as_f64().unwrap().max(1.0));
    assert!(s["result"]["contraction_factor"].as_f64().unwrap() <= 0.5);
    // Floats carry 17 significant digits.
    let text = String::from_utf8(json).unwrap();
    assert!(text.contains("\"tol\": 1.0000000000000000e-10"), "{text}");
    let (header, rows) = csv_rows(&dir, "solve");
    assert_eq!(header, ["x_1", "eta"]);
    assert_eq!(rows.len(), 32);
}

#[test]
fn linear_solve_with_random_data() {
    let dir = workdir("linear");
    let mut args = vec!["solve-linear", "--set", "experiment.data=random", "--set", "experiment.seed=3"];
    args.extend(SMALL);
    let o = slipwave(&dir, &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&dir, "solve-linear");
    assert!(s["result"]["roundtrip_defect"].as_f64().unwrap() < 1e-8);
}

#[test]
fn zero_tension_rejected_in_three_dimensions() {
    let dir = workdir("sigma0");
    let o = slipwave(&dir, &["symbols", "--set", "grid.dim=2", "--set", "grid.nx=8", "--set", "params.sigma=0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("n = 2"), "{}", stderr(&o));
    assert!(!dir.join("symbols.json").exists());
}

#[test]
fn negative_definite_beta_rejected() {
    let dir = workdir("beta");
    let o = slipwave(&dir, &["symbols", "--set", "params.beta=[[-1, 0], [0, -1]]"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("positive definite"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    let dir = workdir("usage");
    assert_eq!(code(&slipwave(&dir, &["symbols", "--set", "params.sigmaa=1"])), 1);
    assert_eq!(code(&slipwave(&dir, &["frobnicate"])), 1);
    assert_eq!(code(&slipwave(&dir, &[])), 1);
    assert_eq!(code(&slipwave(&dir, &["solve", "--threads", "0"])), 1);
    assert_eq!(code(&slipwave(&dir, &["solve", "--config", "missing.toml"])), 1);
    assert_eq!(code(&slipwave(&dir, &["--help"])), 0);
}

#[test]
fn print_config_round_trips() {
    let dir = workdir("print");
    let o = slipwave(&dir, &["sweep-alpha", "--print-config", "--set", "solver.mode=newton"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let t: toml::Table = text.parse().unwrap();
    assert_eq!(t["solver"]["mode"].as_str(), Some("newton"));
    assert_eq!(t["experiment"]["kind"].as_str(), Some("sweep-alpha"));
}

#[test]
fn solver_failure_is_recorded() {
    let dir = workdir("fail");
    let mut args = vec!["solve", "--set", "solver.max_iter=1"];
    args.extend(SMALL);
    let o = slipwave(&dir, &args);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let s = summary(&dir, "solve");
    assert_eq!(s["status"], "solver_failure");
    assert_eq!(s["exit_code"], 2);
    assert_eq!(s["errors"][0]["code"], "no_convergence");
}

#[test]
fn sweep_has_one_row_per_alpha() {
    let dir = workdir("sweep");
    let mut args = vec!["sweep-alpha", "--set", "experiment.alphas=[0.1, 0.01, 0.001]", "--threads", "1"];
    args.extend(SMALL);
    let o = slipwave(&dir, &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&dir, "sweep-alpha");
    assert_eq!(header[0], "alpha");
    assert_eq!(rows.len(), 3);
    let s = summary(&dir, "sweep-alpha");
    assert_eq!(s["result"]["all_converged"], true);
    assert_eq!(s["result"]["distances_decreasing"], true);
}

#[test]
fn verify_passes_and_fails_honestly() {
    let dir = workdir("verify");
    let mut args = vec!["verify", "--set", "experiment.samples=3", "--set", "experiment.alphas=[0.1, 0.001]"];
    args.extend(SMALL);
    let o = slipwave(&dir, &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&dir, "verify");
    assert!(s["result"]["failed"].as_array().unwrap().is_empty());
    assert_eq!(s["result"]["checks"].as_array().unwrap().len(), 9);

    // A heavily damped iteration contracts too slowly.
    args.extend(["--set", "solver.damping=0.3", "--set", "solver.max_iter=200"]);
    let o = slipwave(&dir, &args);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let s = summary(&dir, "verify");
    assert_eq!(s["status"], "verification_failure");
    assert_eq!(s["result"]["failed"][0], "nonlinear_solve");
}
