use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maxstab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn eval_reports_one_row_per_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"atoms":[{"x":0,"p":0.5},{"x":2,"p":0.5}]}"#);
    let u = write(dir.path(), "u.json", r#"{"family":"uniform","a":0,"b":1}"#);
    let o = run(&["eval", "--dist", a.to_str().unwrap(), "--dist", u.to_str().unwrap(), "--measure", r#"{"kind":"es","alpha":0.5}"#]);
    assert!(o.status.success());
    let v = json_stdout(&o);
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["value"].as_f64().unwrap(), 2.0);
    // ES_0.5 of U(0,1) is 0.75; atoms at the cell left ends pull it down by half a cell
    let es_u = rows[1]["value"].as_f64().unwrap();
    assert_eq!(es_u, 0.75 - 0.5 / 1024.0);
}

#[test]
fn lattice_join_writes_pointwise_min() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", r#"{"atoms":[{"x":0,"p":0.5},{"x":2,"p":0.5}]}"#);
    let g = write(dir.path(), "g.json", r#"{"atoms":[{"x":1,"p":1}]}"#);
    let out = dir.path().join("j.json");
    let o = run(&["lattice", "--dist", f.to_str().unwrap(), "--dist", g.to_str().unwrap(), "--op", "join", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let xs: Vec<f64> = v["atoms"].as_array().unwrap().iter().map(|a| a["x"].as_f64().unwrap()).collect();
    let ps: Vec<f64> = v["atoms"].as_array().unwrap().iter().map(|a| a["p"].as_f64().unwrap()).collect();
    assert_eq!(xs, vec![1.0, 2.0]);
    assert_eq!(ps, vec![0.5, 0.5]);
    let o = run(&["lattice", "--dist", f.to_str().unwrap(), "--op", "join"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_exit_codes_follow_verdict() {
    let es = run(&["check", "--measure", r#"{"kind":"es","alpha":0.5}"#, "--axiom", "maxs", "--trials", "2000", "--seed", "3"]);
    assert_eq!(es.status.code(), Some(1));
    let v = json_stdout(&es);
    assert_eq!(v["verdict"], "fail");
    assert!(v["witness"].is_object());
    let var = run(&["check", "--measure", r#"{"kind":"var","alpha":0.4}"#, "--axiom", "maxs", "--trials", "2000", "--seed", "3"]);
    assert_eq!(var.status.code(), Some(0));
    assert_eq!(json_stdout(&var)["violations"], 0);
    let again = run(&["check", "--measure", r#"{"kind":"es","alpha":0.5}"#, "--axiom", "maxs", "--trials", "2000", "--seed", "3"]);
    assert_eq!(again.stdout, es.stdout);
}

#[test]
fn malformed_inputs_exit_with_error_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"atoms":[{"x":0,"p":0.5},{"x":2,"p":0.4}]}"#);
    let o = run(&["eval", "--dist", bad.to_str().unwrap(), "--measure", r#"{"kind":"var","alpha":0.5}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[MASS_SUM]"));
    let garbage = write(dir.path(), "g.json", "{not json");
    let o = run(&["eval", "--dist", garbage.to_str().unwrap(), "--measure", r#"{"kind":"var","alpha":0.5}"#]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[MALFORMED_JSON]"));
    let o = run(&["eval", "--dist", garbage.to_str().unwrap(), "--measure", r#"{"kind":"var","alpha":2}"#]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn constructed_grid_feeds_superlevel_export() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    let measure = r#"{"kind":"lambda","Lambda":{"breakpoints":[-2,0.4],"values":[0.9,0.6,0.3],"direction":"dec"}}"#;
    let o = run(&[
        "construct-psi", "--measure", measure, "--x-range", "-5", "5", "--x-cells", "100", "--p-cells", "100",
        "--verify", "200", "--out", grid.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("verify: 200 distributions"));
    let csv_path = dir.path().join("level.csv");
    let o = run(&["superlevel", "--kernel", grid.to_str().unwrap(), "--threshold", "0", "--out", csv_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,p_boundary,reachable"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 101);
    for r in &rows {
        let x: f64 = r[0].parse().unwrap();
        // ψ(x, p) ≥ 0 needs x ≥ 0 and p below Λ's value at 0.4
        if x < 0.0 {
            assert_eq!(r[2], "false", "{r:?}");
        } else {
            assert_eq!(r[2], "true", "{r:?}");
        }
    }
}

#[test]
fn superlevel_accepts_inline_kernels() {
    let o = run(&["superlevel", "--kernel", r#"{"kind":"var","alpha":0.3}"#, "--threshold", "1", "--resolution", "11", "--x-range", "0", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows[0].ends_with("false"));
    assert!(rows[10].ends_with("true"));
}
