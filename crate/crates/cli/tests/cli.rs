use std::path::PathBuf;
use std::process::{Command, Output};

use nndisp::SweepTable;
use serde_json::Value;

fn nndisp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nndisp"))
        .args(args)
        .env("NNDISP_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = nndisp(args);
    assert!(
        out.status.success(),
        "nndisp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn err(args: &[&str]) -> (i32, String) {
    let out = nndisp(args);
    assert!(!out.status.success(), "nndisp {args:?} unexpectedly succeeded");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stderr).unwrap())
}

fn json(args: &[&str]) -> Value {
    let v: Value = serde_json::from_str(&ok(args)).expect("valid JSON");
    let schema_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/output.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let problems: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(problems.is_empty(), "schema violations for {args:?}: {problems:?}");
    v
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nndisp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const APPROX: &[&str] = &["approx", "--power", "1", "--n", "1000", "--eps", "0.05", "--format", "json"];

fn log_m(v: &Value, i: usize) -> f64 {
    v["reports"][i]["log_m"].as_f64().unwrap()
}

#[test]
fn approx_gaussian_shell() {
    let v = json(&[APPROX, &["--noise", "gaussian", "--codebook", "shell"]].concat());
    assert!((log_m(&v, 0) - 314.72).abs() < 0.005, "{}", log_m(&v, 0));
    assert_eq!(v["reports"][0]["dispersion"].as_f64().unwrap(), 0.375);
}

#[test]
fn rademacher_noise_allows_more_messages() {
    let g = json(&[APPROX, &["--noise", "gaussian"]].concat());
    let r = json(&[APPROX, &["--noise", "rademacher"]].concat());
    assert_eq!(r["reports"][0]["dispersion"].as_f64().unwrap(), 0.25);
    assert!(log_m(&r, 0) > log_m(&g, 0));
}

#[test]
fn half_error_probability_gives_capacity() {
    let v = json(&["approx", "--power", "3", "--n", "777", "--eps", "0.5", "--format", "json"]);
    assert_eq!(log_m(&v, 0), 777.0 * 2f64.ln());
}

#[test]
fn both_codebooks_and_bits() {
    let v = json(&["approx", "--n", "100", "--eps", "0.1", "--codebook", "both", "--bits", "--format", "json"]);
    assert_eq!(v["units"], "bits");
    let r = v["reports"].as_array().unwrap();
    assert_eq!(r.len(), 2);
    assert_eq!(r[0]["codebook"], "shell");
    assert_eq!(r[1]["codebook"], "iid");
    assert!((r[0]["capacity"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!(r[1]["dispersion"].as_f64().unwrap() > r[0]["dispersion"].as_f64().unwrap());
}

#[test]
fn approx_text_output_mentions_log_m() {
    let t = ok(&["approx", "--n", "1000", "--eps", "0.05"]);
    assert!(t.contains("log M: 3.147"), "{t}");
}

#[test]
fn simulate_is_deterministic_and_schema_valid() {
    let args = ["simulate", "--n", "100", "--eps", "0.1", "--trials", "2000", "--seed", "9", "--format", "json"];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a, b);
    assert_eq!(a["method"], "semi_analytic");
    let e = a["estimate"].as_f64().unwrap();
    assert!(e > 0.0 && e < 0.3, "{e}");
}

#[test]
fn logm_and_rate_agree() {
    let a = json(&["simulate", "--n", "50", "--logm", "10", "--trials", "500", "--format", "json"]);
    let b = json(&["simulate", "--n", "50", "--rate", "0.2", "--trials", "500", "--format", "json"]);
    assert_eq!(a["estimate"], b["estimate"]);
}

#[test]
fn worker_count_does_not_change_results() {
    let args = ["simulate", "--n", "64", "--logm", "8", "--trials", "3000", "--seed", "5", "--format", "json"];
    let run = |w: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_nndisp")).args(args).env("NNDISP_WORKERS", w).output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn brute_force_runs_and_guards() {
    let v = json(&[
        "simulate", "--n", "8", "--logm", "2", "--method", "brute", "--trials", "2000", "--format", "json",
    ]);
    assert_eq!(v["method"], "brute_force");
    let (code, msg) = err(&["simulate", "--n", "8", "--logm", "20", "--method", "brute", "--trials", "10"]);
    assert_eq!(code, 1);
    assert!(msg.starts_with("error[guard]:"), "{msg}");
    assert!(msg.contains("semi-analytic"));
}

#[test]
fn interfere_alias() {
    let v = json(&[
        "interfere", "--power", "10", "--interferers", "1", "--n", "200", "--eps", "0.1", "--trials", "500",
        "--format", "json",
    ]);
    assert_eq!(v["scenario"]["interferers"][0]["power"], 1.0);
    assert!((v["dispersion"].as_f64().unwrap() - 920.0 / 2304.0).abs() < 1e-12);
}

#[test]
fn sweep_reproduces_interferer_curves() {
    let csv = ok(&[
        "sweep", "--var", "num_interferers", "--values", "1..8", "--power", "10", "--interferers", "1",
    ]);
    let t = SweepTable::from_csv(&csv).unwrap();
    assert_eq!(t.rows.len(), 8);
    let v = t.column("v_shell_interference").unwrap();
    assert!((v[0] - 920.0 / 2304.0).abs() < 1e-12);
    assert!((t.column("v_iid_sinr").unwrap()[0] - 5.0 / 6.0).abs() < 1e-12);
    assert!((t.column("v_shell_sinr").unwrap()[0] - 35.0 / 72.0).abs() < 1e-12);
}

#[test]
fn sweep_csv_and_json_agree() {
    let base = [
        "sweep", "--var", "n", "--values", "100,200,400", "--eps", "0.2", "--trials", "300", "--noise", "laplace",
    ];
    let c = SweepTable::from_csv(&ok(&base)).unwrap();
    let jv = json(&[&base[..], &["--format", "json"]].concat());
    let j = SweepTable::from_json(&jv.to_string()).unwrap();
    assert_eq!(c, j);
    assert_eq!(c.metadata["noise"], "laplace");
    assert_eq!(c.metadata["trials"], "300");
}

#[test]
fn n_sweep_at_half_has_rate_equal_capacity() {
    let t = SweepTable::from_csv(&ok(&["sweep", "--var", "n", "--values", "10,1000,100000", "--eps", "0.5"])).unwrap();
    assert_eq!(t.column("rate").unwrap(), t.column("capacity").unwrap());
}

#[test]
fn sweep_to_file() {
    let path = tmp("sweep.csv");
    let stdout = ok(&["sweep", "--var", "power", "--values", "1,2", "--out", path.to_str().unwrap()]);
    assert!(stdout.is_empty());
    let t = SweepTable::from_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(t.column("power").unwrap(), vec![1.0, 2.0]);
}

#[test]
fn clt_check_table() {
    let v = json(&["clt-check", "--n-values", "50,500", "--trials", "2000", "--format", "json"]);
    let t = SweepTable::from_json(&v.to_string()).unwrap();
    assert_eq!(t.columns, ["n", "ks_distance", "fluctuation"]);
    assert_eq!(t.metadata["sigma2"], "6.0000000000000000e0");
    assert!(t.metadata.contains_key("decay_slope"));
}

#[test]
fn diag_typical_defaults_eta_to_power() {
    let v = json(&["diag-typical", "--power", "2", "--n", "100", "--trials", "1000", "--format", "json"]);
    assert_eq!(v["eta"], 2.0);
    let total = v["total_out"].as_f64().unwrap();
    assert!(total >= v["p_y_out"].as_f64().unwrap());
}

#[test]
fn noise_table_file() {
    let path = tmp("rademacher.json");
    std::fs::write(&path, "[[-1.0, 0.5], [1.0, 0.5]]").unwrap();
    let v = json(&[APPROX, &["--noise-table", path.to_str().unwrap()]].concat());
    assert_eq!(v["scenario"]["xi"], 1.0);
    assert_eq!(v["reports"][0]["dispersion"].as_f64().unwrap(), 0.25);

    std::fs::write(&path, "[[-2.0, 0.5], [2.0, 0.5]]").unwrap();
    let (_, msg) = err(&[APPROX, &["--noise-table", path.to_str().unwrap()]].concat());
    assert!(msg.starts_with("error[non-normalized-noise]:"), "{msg}");
}

#[test]
fn error_categories() {
    let (code, msg) = err(&["approx", "--n", "10", "--eps", "1.5"]);
    assert_eq!(code, 1);
    assert!(msg.starts_with("error[domain]:"), "{msg}");

    let (_, msg) = err(&["approx", "--n", "10", "--eps", "0.1", "--noise", "cauchy"]);
    assert!(msg.starts_with("error[config]:"), "{msg}");

    let (_, msg) = err(&[
        "approx", "--n", "10", "--eps", "0.1", "--codebook", "iid", "--interferers", "1", "--interferer-codebook",
        "shell",
    ]);
    assert!(msg.starts_with("error[unsupported]:"), "{msg}");

    let (_, msg) = err(&["sweep", "--var", "n", "--values", "5..2"]);
    assert!(msg.starts_with("error[config]:") && msg.contains("empty"), "{msg}");
}

#[test]
fn usage_errors() {
    for args in [
        &["simulate", "--n", "10", "--logm", "2", "--rate", "0.1"][..],
        &["approx", "--n", "10"][..],
        &["approx", "--n", "10", "--eps", "0.1", "--noise", "laplace", "--noise-table", "x.json"][..],
        &["frobnicate"][..],
    ] {
        let (code, msg) = err(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(msg.starts_with("error[usage]:"), "{args:?}: {msg}");
    }
    assert!(nndisp(&["--help"]).status.success());
    assert!(nndisp(&["--version"]).status.success());
}

#[test]
fn bad_worker_env_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_nndisp"))
        .args(["approx", "--n", "10", "--eps", "0.1"])
        .env("NNDISP_WORKERS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[config]:"));
}
