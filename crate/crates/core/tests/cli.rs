use std::fs;
use std::process::{Command, Output};

use hypermatch::constructions::extremal_construction;
use hypermatch::io::parse_text;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypermatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_ext() {
    let o = run(&["gen", "--ext", "-k", "3", "-n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        parse_text(&stdout(&o)).unwrap(),
        extremal_construction(3, 6).unwrap()
    );
    let o = run(&["gen", "--ext", "-k", "3", "-n", "6", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["edges"].as_array().unwrap().len(), 10);
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ext.txt");
    let p = path.to_str().unwrap();
    assert_eq!(
        run(&["gen", "--ext", "-k", "3", "-n", "6", "--out", p])
            .status
            .code(),
        Some(0)
    );
    let o = run(&["solve", "--input", p]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("no perfect matching"));
    let o = run(&["solve", "--complete", "-k", "3", "-n", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let m: Vec<Vec<u32>> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m.len(), 3);
    let o = run(&[
        "solve",
        "--binomial",
        "0.5",
        "-k",
        "3",
        "-n",
        "30",
        "--budget",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn frac_on_complete() {
    let o = run(&["frac", "--complete", "-k", "3", "-n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let weights = v["matching"]["weights"].as_array().unwrap();
    assert_eq!(weights.len(), 20);
    assert!(weights.iter().all(|w| w["weight"] == "1/10"));
    let o = run(&["frac", "--ext", "-k", "3", "-n", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("certificate"));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "-k", "3", "-n", "6"]).status.code(), Some(2));
    assert_eq!(
        run(&["pipeline", "--ext", "-k", "3", "-n", "6", "--gamma", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["sweep", "-n", "7"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "3 6 1\n0 1 9\n").unwrap();
    let o = run(&["degrees", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn certify_and_extremal() {
    let o = run(&["certify", "--ext", "-k", "3", "-n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["extremal_set"]["bad_edge_count"], 0);

    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    fs::write(
        &cert,
        r#"{"y": ["1/1", "1/1", "1/1", "1/1", "1/1", "1/1"]}"#,
    )
    .unwrap();
    let o = run(&[
        "certify",
        "--complete",
        "-k",
        "3",
        "-n",
        "6",
        "--certificate",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&[
        "extremal",
        "--ext",
        "-k",
        "3",
        "-n",
        "12",
        "--mode",
        "exhaustive",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["witness"]["bad_edge_count"], 0);
    assert!(v["rejected"].is_string());
}

#[test]
fn degrees_and_absorbers() {
    let o = run(&["degrees", "--ext", "-k", "3", "-n", "12"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["delta_plus"], 6);
    assert_eq!(v["threshold"], 7);
    let o = run(&[
        "absorbers",
        "--complete",
        "-k",
        "3",
        "-n",
        "30",
        "--beta",
        "1/5",
        "--samples",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["family"].as_array().unwrap().len(), 1);
}

#[test]
fn pipeline_and_sweep() {
    let o = run(&["pipeline", "--complete", "-k", "3", "-n", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["trace"]["valid"], true);
    let o = run(&["pipeline", "--ext", "-k", "3", "-n", "12", "--no-fallback"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&[
        "--sequential",
        "sweep",
        "-n",
        "6,9",
        "--trials",
        "2",
        "--model",
        "ext",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "k,n,model,seed,delta_plus,isolated,pm_exists,path,agree"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1..]
        .iter()
        .all(|l| l.starts_with("3,") && l.ends_with(",false,none,true")));
}
