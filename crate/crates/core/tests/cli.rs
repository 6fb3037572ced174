//! The `wcaro` binary: subcommands, output files and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wcaro::io::write_instance;
use wcaro::oracle::{random_instance, RandomInstanceOptions};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn wcaro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcaro")).args(args).env("WCARO_THREADS", "2").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_the_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.sol.json");
    let lp = dir.path().join("t1.lp");
    let o = wcaro(&["solve", "--instance", s(&data("t1.json")), "--out", s(&out), "--write-lp", s(&lp)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["record"]["objective"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["record"]["status"], "optimal");
    assert_eq!(v["x"].as_array().unwrap().len(), 1);
    assert!(std::fs::read_to_string(&lp).unwrap().contains("Subject To"));
}

#[test]
fn check_certifies_t2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cert.json");
    let o = wcaro(&["check", "--instance", s(&data("t2.json")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["certificate"]["exact"], true);
    assert!((v["certificate"]["oracle_value_at_xstar"].as_f64().unwrap() - 0.6).abs() < 1e-9);
}

#[test]
fn check_refuses_instances_beyond_the_oracle_caps() {
    let opts = RandomInstanceOptions { max_bin: 14, ..Default::default() };
    let inst = (0..).map(|seed| random_instance(seed, &opts)).find(|i| i.third.n_bin > 10).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("big.json");
    write_instance(&p, &inst).unwrap();
    let o = wcaro(&["check", "--instance", s(&p)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn malformed_input_exits_with_one_and_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"name\": \"x\",\n  \"first\": [\n").unwrap();
    let o = wcaro(&["solve", "--instance", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json") && err.contains("line 4"), "{err}");

    let o = wcaro(&["sweep", "--case", "case5", "--r-grid", "0:1:0", "--out", s(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    let o = wcaro(&["solve", "--case", "case5", "--storage-subset", "9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn node_limit_exits_with_three() {
    let o = wcaro(&["solve", "--case", "case5", "--periods", "4", "--node-limit", "1", "--gap", "0"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_and_bench_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = wcaro(&["sweep", "--case", "case5", "--periods", "4", "--r-grid", "0:1:0.5", "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "R,objective,gap,wall_time,status,unit");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,") && lines[3].starts_with("1,"));

    let suite = dir.path().join("suite.json");
    std::fs::write(&suite, r#"{"periods": 4, "cases": [{"case": "case5"}, {"case": "case30", "storages": [1]}]}"#).unwrap();
    let out = dir.path().join("bench.csv");
    let o = wcaro(&["bench", "--suite", s(&suite), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("case30,30,1,"));

    std::fs::write(&suite, r#"{"cases": [{"case": "case9999"}]}"#).unwrap();
    assert_eq!(wcaro(&["bench", "--suite", s(&suite), "--out", s(&out)]).status.code(), Some(1));
}
