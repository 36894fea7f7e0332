use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn conley(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conley")).current_dir(dir).env_remove("CONLEY_OUTPUT_DIR").args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn empty_report_succeeds() {
    let d = TempDir::new().unwrap();
    let out = conley(d.path(), &["report", "--suite", "none", "--output-dir", "out"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&d.path().join("out/report.json"));
    assert_eq!(r["rows"].as_array().unwrap().len(), 0);
    assert_eq!(r["failed"], 0);
    assert!(d.path().join("out/report.md").exists());
}

#[test]
fn failing_claim_exits_with_one() {
    let d = TempDir::new().unwrap();
    // without inflation, long flow times leave sampled images uncovered
    std::fs::write(d.path().join("run.toml"), "tau = 1.5\nbloat_factor = 1.0\nbloat_floor = 0.0\n").unwrap();
    let out = conley(d.path(), &["report", "--only", "coverage", "--config", "run.toml", "--output-dir", "out"]);
    assert_eq!(out.status.code(), Some(1));
    let row = &json(&d.path().join("out/report.json"))["rows"][0];
    assert_eq!(row["pass"], false);
    assert!(row["computed"].as_str().unwrap().contains("violations"));
    assert_eq!(row["expected"], "0");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let d = TempDir::new().unwrap();
    let args = ["report", "--only", "1,2,3,9,14,coverage", "--seed", "11", "--output-dir", "o"];
    let path = d.path().join("o/report.json");
    assert_eq!(conley(d.path(), &args).status.code(), Some(0));
    let first = std::fs::read_to_string(&path).unwrap();
    assert_eq!(conley(d.path(), &args).status.code(), Some(0));
    assert!(first == std::fs::read_to_string(&path).unwrap(), "report changed between runs");
    let r: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(r["config"]["seed"], 11);
    assert_eq!(r["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let d = TempDir::new().unwrap();
    assert_eq!(conley(d.path(), &["report", "--bogus"]).status.code(), Some(2));
    assert_eq!(conley(d.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(conley(d.path(), &["report", "--only", "99"]).status.code(), Some(2));
    std::fs::write(d.path().join("bad.toml"), "tua = 0.2\n").unwrap();
    let out = conley(d.path(), &["equilibria", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tua"));
    assert_eq!(conley(d.path(), &["equilibria", "--depths", "7,7"]).status.code(), Some(2));
}

#[test]
fn output_directory_precedence() {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("run.toml"), "output_dir = \"from-file\"\n").unwrap();
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_conley"));
        c.current_dir(d.path()).env_remove("CONLEY_OUTPUT_DIR").args(["equilibria", "--config", "run.toml"]).args(extra);
        if let Some(v) = env {
            c.env("CONLEY_OUTPUT_DIR", v);
        }
        assert!(c.output().unwrap().status.success());
    };
    run(None, &[]);
    assert!(d.path().join("from-file/equilibria.json").exists());
    run(Some("from-env"), &[]);
    assert!(d.path().join("from-env/equilibria.json").exists());
    run(Some("from-env-2"), &["--output-dir", "from-flag"]);
    assert!(d.path().join("from-flag/equilibria.json").exists());
    assert!(!d.path().join("from-env-2").exists());
}

#[test]
fn hopf_threshold_subcommand() {
    let d = TempDir::new().unwrap();
    let out = conley(d.path(), &["thresholds", "--kind", "hopf", "--tol", "1e-6", "--output-dir", "o"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["r_star"].as_f64().unwrap() - 24.736842).abs() < 1e-5);
    assert_eq!(v, json(&d.path().join("o/thresholds.json")));
}

#[test]
fn morse_subcommand_writes_artifacts() {
    let d = TempDir::new().unwrap();
    let out = conley(d.path(), &["morse", "--r", "2", "--depths", "7,7,7", "--tau", "0.2", "--output-dir", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dot = std::fs::read_to_string(d.path().join("o/morse.dot")).unwrap();
    assert_eq!(dot.lines().filter(|l| l.contains("[label=")).count(), 3);
    assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 2);
    let m = json(&d.path().join("o/morse.json"));
    assert_eq!(m["equation"], "2+t=1+(1+t)");
    let bin = std::fs::read(d.path().join("o/graph.bin")).unwrap();
    assert_eq!(m["graph_sha256"], conley_cli::output::sha256_hex(&bin));
}

#[test]
fn normal_form_equilibrium_and_symbol_errors() {
    let d = TempDir::new().unwrap();
    let out = conley(d.path(), &["equilibria", "--model", "normal-form", "--output-dir", "o"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["unstable_dim"], 2);
    // symbolic coding is defined for the Lorenz flow only
    assert_eq!(conley(d.path(), &["symbols", "--model", "normal-form"]).status.code(), Some(2));
    // the section z = r - 1 needs r > 1
    assert_eq!(conley(d.path(), &["symbols", "--r", "0.5", "--length", "2"]).status.code(), Some(2));
}

#[test]
fn crossings_csv() {
    let d = TempDir::new().unwrap();
    let out = conley(d.path(), &["symbols", "--r", "28", "--crossings", "20", "--output-dir", "o"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(d.path().join("o/crossings.csv")).unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(csv.lines().count() as u64, 1 + v["crossings"].as_u64().unwrap());
    assert!(csv.starts_with("t,x,y,z,direction,symbol"));
}
