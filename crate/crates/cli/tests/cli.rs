use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qubo-prep"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const PATH3: &str = "p qubo 3\nl 1 1\nl 2 1\nl 3 2\nq 1 2 -2\nq 2 3 1\n";
const SILENT: &str = "p qubo 3\nl 1 -5\nl 2 1\nl 3 1\nq 1 2 3\nq 1 3 3\nq 2 3 -3\n";

#[test]
fn generate_single_instance() {
    let t = TempDir::new().unwrap();
    let args = ["generate", "--size", "1000", "--edges", "5000", "--design-row", "1", "--seed", "42", "-o", "p.qubo"];
    assert!(run(t.path(), &args).status.success());
    let text = fs::read_to_string(t.path().join("p.qubo")).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("q ")).count(), 5000);
    assert!(text.lines().any(|l| l.starts_with("# ")));
    assert!(run(t.path(), &["generate", "--size", "1000", "--edges", "5000", "--design-row", "1", "--seed", "42", "-o", "again.qubo"]).status.success());
    assert_eq!(fs::read(t.path().join("again.qubo")).unwrap(), text.as_bytes());
}

#[test]
fn generate_desk_suite() {
    let t = TempDir::new().unwrap();
    assert!(run(t.path(), &["generate", "--suite", "desk", "--seed", "7", "-o", "dir/"]).status.success());
    assert_eq!(fs::read_dir(t.path().join("dir")).unwrap().count(), 32);
}

#[test]
fn bad_design_row_is_a_usage_error() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["generate", "--design-row", "17", "--size", "10", "--edges", "20", "-o", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reduce_path_of_three() {
    let t = TempDir::new().unwrap();
    write(t.path(), "t.qubo", PATH3);
    let o = run(t.path(), &["reduce", "t.qubo"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("100.00% reduced"));
    let r = json(t.path().join("t.report.json"));
    assert_eq!(r["percent_reduction"], 100.0);
    assert_eq!(r["reduced_offset"], 4);
    assert_eq!(r["firings"], serde_json::json!({"R1_0": 1, "R3_2": 1}));
}

#[test]
fn reduce_silent_instance_is_identity() {
    let t = TempDir::new().unwrap();
    write(t.path(), "s.qubo", SILENT);
    assert!(run(t.path(), &["reduce", "s.qubo"]).status.success());
    let r = json(t.path().join("s.report.json"));
    assert_eq!(r["percent_reduction"], 0.0);
    let before = qubo_prep_text(&t.path().join("s.qubo"));
    let after = qubo_prep_text(&t.path().join("s.reduced.qubo"));
    assert_eq!(before, after);
}

// Non-comment lines, which is the canonical form the writer emits.
fn qubo_prep_text(p: &Path) -> Vec<String> {
    let mut lines: Vec<String> = fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && *l != "o 0")
        .map(str::to_string)
        .collect();
    lines.sort();
    lines
}

#[test]
fn max_passes_caps_the_run() {
    let t = TempDir::new().unwrap();
    let gen = ["generate", "--size", "100", "--edges", "500", "--design-row", "3", "--seed", "5", "-o", "g.qubo"];
    assert!(run(t.path(), &gen).status.success());
    assert!(run(t.path(), &["reduce", "g.qubo"]).status.success());
    let full = json(t.path().join("g.report.json"));
    assert!(full["pass_count"].as_u64().unwrap() > 2, "needs a multi-pass instance");
    assert!(run(t.path(), &["reduce", "g.qubo", "--max-passes", "1", "--report", "one.json"]).status.success());
    let one = json(t.path().join("one.json"));
    assert_eq!(one["pass_count"], 1);
    assert!(one["survivors"].as_u64().unwrap() > full["survivors"].as_u64().unwrap());
}

#[test]
fn verify_exit_codes() {
    let t = TempDir::new().unwrap();
    write(t.path(), "t.qubo", "p qubo 2\nl 1 1\nl 2 1\nq 1 2 -2\n");
    assert!(run(t.path(), &["reduce", "t.qubo"]).status.success());
    let ok = run(t.path(), &["verify", "t.qubo", "t.reduced.qubo", "t.map.json"]);
    assert_eq!(ok.status.code(), Some(0));

    let mut doc = json(t.path().join("t.map.json"));
    let map = &mut doc["map"];
    if let Some(a) = map["assignments"].as_array_mut().and_then(|a| a.first_mut()) {
        a[1] = Value::from(1 - a[1].as_u64().unwrap());
    } else {
        let id = &mut map["identities"][0][1];
        *id = if id.get("SameAs").is_some() {
            serde_json::json!({"ComplementOf": id["SameAs"]})
        } else {
            serde_json::json!({"SameAs": id["ComplementOf"]})
        };
    }
    fs::write(t.path().join("bad.json"), doc.to_string()).unwrap();
    let bad = run(t.path(), &["verify", "t.qubo", "t.reduced.qubo", "bad.json"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("reconstructed"));

    write(t.path(), "big.qubo", "p qubo 30\n");
    assert!(run(t.path(), &["reduce", "big.qubo"]).status.success());
    let big = run(t.path(), &["verify", "big.qubo", "big.reduced.qubo", "big.map.json"]);
    assert_eq!(big.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_2() {
    let t = TempDir::new().unwrap();
    write(t.path(), "bad.qubo", "p qubo 2\nq 1 1 3\n");
    let o = run(t.path(), &["reduce", "bad.qubo"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(run(t.path(), &["solve", "missing.qubo"]).status.code(), Some(2));
}

#[test]
fn solve_examples() {
    let t = TempDir::new().unwrap();
    write(t.path(), "a.qubo", "p qubo 2\nl 1 3\nl 2 -2\nq 1 2 2\n");
    assert!(stdout(&run(t.path(), &["solve", "a.qubo"])).starts_with("optimum 3\n"));
    write(t.path(), "t.qubo", PATH3);
    let o = stdout(&run(t.path(), &["solve", "--preprocess", "t.qubo"]));
    assert_eq!(o, "optimum 4\nassignment 0 1 1\nremnant 0\n");
    write(t.path(), "e.qubo", "p qubo 0\no 7\n");
    assert!(stdout(&run(t.path(), &["solve", "e.qubo"])).starts_with("optimum 7\n"));
}

#[test]
fn preprocessing_keeps_the_optimum() {
    let t = TempDir::new().unwrap();
    for row in 1..=16 {
        let name = format!("r{row}.qubo");
        let row = row.to_string();
        let gen = ["generate", "--size", "18", "--edges", "60", "--design-row", &row, "--seed", "3", "-o", &name];
        assert!(run(t.path(), &gen).status.success());
        let plain = stdout(&run(t.path(), &["solve", &name]));
        let pre = stdout(&run(t.path(), &["solve", "--preprocess", &name]));
        assert_eq!(plain.lines().next(), pre.lines().next(), "row {row}");
    }
}

#[test]
fn renumbered_output_verifies_and_runs_are_repeatable() {
    let t = TempDir::new().unwrap();
    let gen = ["generate", "--size", "20", "--edges", "60", "--design-row", "7", "--seed", "11", "-o", "g.qubo"];
    assert!(run(t.path(), &gen).status.success());
    assert!(run(t.path(), &["reduce", "g.qubo", "--renumber", "-o", "a.qubo", "--map", "a.json"]).status.success());
    assert!(run(t.path(), &["reduce", "g.qubo", "--renumber", "-o", "b.qubo", "--map", "b.json"]).status.success());
    assert_eq!(fs::read(t.path().join("a.qubo")).unwrap(), fs::read(t.path().join("b.qubo")).unwrap());
    assert_eq!(fs::read(t.path().join("a.json")).unwrap(), fs::read(t.path().join("b.json")).unwrap());
    let o = run(t.path(), &["verify", "g.qubo", "a.qubo", "a.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn suite_reduction_and_report() {
    let t = TempDir::new().unwrap();
    assert!(run(t.path(), &["generate", "--suite", "desk", "--seed", "7", "-o", "in"]).status.success());
    let o = run(t.path(), &["reduce", "--suite", "in", "--out-dir", "out", "--jobs", "4", "--emit-inequalities"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("runs        32"));
    let reports: Vec<String> = (1..=16).map(|r| format!("out/100L_r{r:02}.report.json")).collect();
    let mut args = vec!["report", "--summary-only"];
    args.extend(reports.iter().map(String::as_str));
    let s = stdout(&run(t.path(), &args));
    assert!(s.starts_with("runs        16\n"));
    let one = json(t.path().join("out/100L_r01.report.json"));
    assert!(!one["inequalities"].as_object().unwrap().is_empty());
}
