use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde::Deserialize;
use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn wiretap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wiretap"))
        .args(args)
        .current_dir(root())
        .env_remove("WIRETAP_OUT_DIR")
        .output()
        .expect("spawn wiretap")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json record")
}

#[test]
fn secrecy_capacity_record() {
    let v = json(&wiretap(&["capacity", "secrecy", "fixtures/bsc05_20.wtc"]));
    assert_eq!(v["tool"], "wiretap");
    assert_eq!(v["version"], wiretap_core::VERSION);
    assert_eq!(v["command"], "capacity secrecy");
    assert_eq!(v["config"]["wiretap"], "fixtures/bsc05_20.wtc");
    let c = v["result"]["value_bits"].as_f64().unwrap();
    assert!((c - 0.435_531_137_771_4).abs() < 1e-9, "{c}");
}

#[test]
fn malformed_channel_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ch");
    std::fs::write(&path, "# header\n2 2\n0.9 0.1\n0.1 oops\n").unwrap();
    let out = wiretap(&["capacity", "shannon", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":4"), "{err}");
}

#[test]
fn exit_codes() {
    assert_eq!(wiretap(&["--help"]).status.code(), Some(0));
    assert_eq!(wiretap(&["--version"]).status.code(), Some(0));
    assert_eq!(wiretap(&["capacity"]).status.code(), Some(2));
    assert_eq!(wiretap(&["capacity", "shannon", "fixtures/missing.ch"]).status.code(), Some(2));
    // the reversed pair is not degraded
    let out = wiretap(&["simulate", "--wiretap", "fixtures/reversed.wtc", "--n", "8", "--rate", "0.1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = wiretap(&[
        "simulate", "--wiretap", "fixtures/bsc05_20.wtc", "--n", "64", "--rate", "0.2", "--seed", "1", "--exact-leakage",
    ]);
    assert_eq!(out.status.code(), Some(4));
    // randomized commands need a seed
    let out = wiretap(&["simulate", "--wiretap", "fixtures/bsc05_20.wtc", "--n", "8", "--rate", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = wiretap(&["sweep", "--wiretap", "fixtures/bsc05_20.wtc", "--rates", "", "--n-list", "8", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degraded_check_verdicts() {
    let v = json(&wiretap(&["degraded-check", "fixtures/bsc05_20.wtc"]));
    assert_eq!(v["result"]["verdict"], "physically_factored");
    let v = json(&wiretap(&["degraded-check", "fixtures/reversed.wtc"]));
    assert_eq!(v["result"]["verdict"], "not_degraded");
    assert!(v["result"]["residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn metrics_of_exposed_message() {
    let v = json(&wiretap(&["metrics", "fixtures/exposed.joint", "--eta1", "0.5"]));
    let m = &v["result"]["metrics"];
    assert_eq!(m["s1"], 1.0);
    assert_eq!(m["s2"], 0.5);
    assert_eq!(m["s3"], 1.0);
    assert_eq!(v["result"]["csiszar"]["status"], "inapplicable");
}

#[test]
fn run_file_matches_direct_invocation() {
    let direct = wiretap(&["capacity", "secrecy", "fixtures/bsc05_20.wtc", "--tol", "1e-10"]);
    let via = wiretap(&["run", "fixtures/secrecy.toml"]);
    assert_eq!(json(&direct), json(&via));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nested.toml");
    std::fs::write(&cfg, "command = \"run\"\n[params]\nfile = \"x.toml\"\n").unwrap();
    assert_eq!(wiretap(&["run", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, "command = \"capacity secrecy\"\n[params]\nfile = \"fixtures/bsc05_20.wtc\"\nbogus = 1\n").unwrap();
    assert_eq!(wiretap(&["run", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn out_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wiretap"))
        .args(["--out", "sub/cap.json", "capacity", "secrecy", "fixtures/bsc05_20.wtc"])
        .current_dir(root())
        .env("WIRETAP_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("sub/cap.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "capacity secrecy");
}

fn simulate_to(dir: &Path, name: &str, threads: &str) -> Vec<u8> {
    let path = dir.join(name);
    let out = wiretap(&[
        "--threads", threads, "--out", path.to_str().unwrap(), "simulate", "--wiretap", "fixtures/bsc05_20.wtc",
        "--n", "24", "--rate", "0.2", "--trials", "400", "--leakage-trials", "200", "--seed", "11",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn output_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let one = simulate_to(dir.path(), "a.json", "1");
    let four = simulate_to(dir.path(), "b.json", "4");
    let again = simulate_to(dir.path(), "c.json", "4");
    assert_eq!(one, four);
    assert_eq!(four, again);
    let v: Value = serde_json::from_slice(&one).unwrap();
    assert!(v["config"].get("threads").is_none());
    assert_eq!(v["result"]["leakage"]["kind"], "tails");
}

#[derive(Debug, Deserialize)]
struct SweepCsvRow {
    rate: f64,
    n: usize,
    eps_hat: f64,
    eps_ci: f64,
    s6_hat: f64,
    s6_ci: f64,
    qn_hat: f64,
    qn_ci: f64,
}

fn same(a: f64, b: &Value) -> bool {
    match b.as_f64() {
        Some(b) => a == b,
        None => a.is_nan() && b.is_null(),
    }
}

#[test]
fn sweep_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let v = json(&wiretap(&[
        "sweep", "--wiretap", "fixtures/bsc05_20.wtc", "--rates", "0:0.2:0.1", "--n-list", "8,16", "--trials", "300",
        "--leakage-trials", "100", "--seed", "5", "--csv", csv_path.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.starts_with("rate,n,eps_hat,eps_ci,s6_hat,s6_ci,qn_hat,qn_ci\n"));
    let rows: Vec<SweepCsvRow> = csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    let table = v["result"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows.len(), table.len());
    for (r, j) in rows.iter().zip(table) {
        assert!(same(r.rate, &j["rate"]) && r.n as u64 == j["n"].as_u64().unwrap());
        for (a, key) in [
            (r.eps_hat, "eps_hat"),
            (r.eps_ci, "eps_ci"),
            (r.s6_hat, "s6_hat"),
            (r.s6_ci, "s6_ci"),
            (r.qn_hat, "qn_hat"),
            (r.qn_ci, "qn_ci"),
        ] {
            assert!(same(a, &j[key]), "{key}: {a} vs {}", j[key]);
        }
    }
}

#[test]
fn one_row_table_and_empty_table() {
    #[derive(serde::Serialize)]
    struct Row {
        a: f64,
    }
    let bytes = wiretap_core::io::csv_bytes(&[Row { a: 0.25 }]).unwrap();
    assert_eq!(String::from_utf8(bytes).unwrap(), "a\n0.25\n");
    let empty: [Row; 0] = [];
    assert!(wiretap_core::io::csv_bytes(&empty).is_err());
}

#[test]
fn cesaro_and_gaussian_commands() {
    let v = json(&wiretap(&[
        "cesaro", "--family", "bsc-constant", "--params", "0.05,0.2", "--n-list", "1,10,100",
    ]));
    for row in v["result"]["rows"].as_array().unwrap() {
        assert!((row["diff"].as_f64().unwrap() - 0.435_531_137_771_4).abs() < 1e-12);
    }
    assert_eq!(v["result"]["diagnostic"]["converged"], true);
    let v = json(&wiretap(&["cesaro", "--list", "fixtures/pairs.list", "--n-list", "1,2"]));
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 2);
    let out = wiretap(&["cesaro", "--list", "fixtures/pairs.list", "--n-list", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&wiretap(&["gaussian", "capacity", "--S", "1", "--sigma1sq", "1", "--sigma2sq", "4"]));
    assert!((v["result"]["value_bits"].as_f64().unwrap() - 0.339_035_952_556_318_8).abs() < 1e-12);
    assert_eq!(v["config"]["S"], 1.0);
}
