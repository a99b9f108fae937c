use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TREE_LABELS: &str = "010011100100100";
const RING_LABELS: &str = "01101101";
const EXAMPLE_CNF: &str = "c three clauses\np cnf 3 3\n1 -2 0\n2 -3 0\n-1 -2 -3 0\n";
const PIGEONHOLE_CNF: &str = "p cnf 6 9\n1 2 0\n3 4 0\n5 6 0\n-1 -3 0\n-1 -5 0\n-3 -5 0\n-2 -4 0\n-2 -6 0\n-4 -6 0\n";

fn dbfraud(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbfraud"))
        .args(args)
        .env_remove("DBFRAUD_MAX_WALKS")
        .env_remove("DBFRAUD_MAX_CANDIDATES")
        .env_remove("DBFRAUD_MAX_EXACT_ROUNDS")
        .env_remove("DBFRAUD_MAX_BRUTE_VERTICES")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = dbfraud(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn exit_code(args: &[&str]) -> i32 {
    dbfraud(args).status.code().expect("exit code")
}

fn keys(v: &Value) -> Vec<&str> {
    let mut k: Vec<_> = v.as_object().expect("object").keys().map(String::as_str).collect();
    k.sort_unstable();
    k
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generated_tree_has_expected_mfs() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("tree.json");
    let written = json(&["generate", "tree", "-n", "3", "--labels", TREE_LABELS, "-o", path_str(&file)]);
    assert_eq!(written["vertices"], 15);
    assert_eq!(written["edges"], 14);
    let r = json(&["mfs", path_str(&file), "-k", "4"]);
    assert_eq!(r["sequence"], "0010");
    assert_eq!(r["count"], 3);
    assert_eq!(keys(&r), ["count", "elapsed_ms", "length", "mode", "sequence", "start", "tie_count"]);
}

#[test]
fn ring_mfs_in_every_mode() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("ring.json");
    json(&["generate", "poulidor", "-n", "4", "--labels", RING_LABELS, "-o", path_str(&file)]);
    for mode in ["seq", "walk", "auto"] {
        let r = json(&["mfs", path_str(&file), "-k", "4", "--mode", mode]);
        assert_eq!(r["sequence"], "0101", "{mode}");
        assert_eq!(r["count"], 4, "{mode}");
    }
}

#[test]
fn generate_to_stdout_is_a_graph_document() {
    let ring = json(&["generate", "poulidor", "-n", "2"]);
    assert_eq!(ring["vertices"].as_array().unwrap().len(), 4);
    let single = json(&["generate", "gentree", "-m", "0", "-n", "3"]);
    assert_eq!(single["vertices"].as_array().unwrap().len(), 1);
    assert!(single["edges"].as_array().unwrap().is_empty());
}

#[test]
fn seeded_generation_is_reproducible() {
    let a = json(&["generate", "tree", "-n", "4", "--seed", "9"]);
    let b = json(&["generate", "tree", "-n", "4", "--seed", "9"]);
    assert_eq!(a, b);
}

#[test]
fn single_vertex_mfs() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("one.json");
    json(&["generate", "gentree", "-m", "0", "-n", "2", "--labels", "1", "-o", path_str(&file)]);
    let r = json(&["mfs", path_str(&file), "-k", "1"]);
    assert_eq!(r["sequence"], "1");
    assert_eq!(r["count"], 1);
}

#[test]
fn exact_tree_report() {
    let r = json(&["df", "exact-tree", "-n", "1"]);
    assert_eq!(r["expected_max_exact"], "3/2^1");
    assert_eq!(r["success_probability_exact"], "3/2^2");
    assert_eq!(r["lower_bound"], 0.5);
    assert_eq!(
        keys(&r),
        [
            "expected_max",
            "expected_max_decimal",
            "expected_max_exact",
            "lower_bound",
            "method",
            "rounds",
            "success_probability",
            "success_probability_decimal",
            "success_probability_exact",
        ]
    );
}

#[test]
fn brute_force_agrees_with_exact_tree() {
    let exact = json(&["df", "exact-tree", "-n", "2"]);
    let brute = json(&["df", "brute", "-n", "2"]);
    assert_eq!(exact["expected_max_exact"], brute["expected_max_exact"]);
    assert_eq!(brute["expected_max_exact"], "9/2^2");
}

#[test]
fn sweep_csv_has_one_row_per_round() {
    let out = dbfraud(&["df", "exact-tree", "--sweep", "1..4", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("rounds,method,expected_max"));
    assert!(lines[1].starts_with("1,"));
}

#[test]
fn monte_carlo_is_reproducible() {
    let args = ["df", "mc", "-n", "3", "--samples", "2000", "--seed", "5"];
    let a = json(&args);
    assert_eq!(a, json(&args));
    assert_eq!(a["monte_carlo"]["samples"], 2000);
}

#[test]
fn reduce_verifies_satisfiable_formula() {
    let dir = TempDir::new().unwrap();
    let cnf = dir.path().join("f.cnf");
    std::fs::write(&cnf, EXAMPLE_CNF).unwrap();
    let graph = dir.path().join("r.json");
    let r = json(&["reduce", path_str(&cnf), "--verify", "-o", path_str(&graph)]);
    assert_eq!(r["vertices"], 22);
    assert_eq!(r["verdict"]["mfs_count"], 3);
    assert_eq!(r["verdict"]["satisfiable"], true);
    assert_eq!(r["verdict"]["consistent"], true);
    assert_eq!(r["walk_lengths"]["passed"], true);
    assert_eq!(r["params"]["target_length"], 6);
    let m = json(&["mfs", path_str(&graph), "-k", "6"]);
    assert_eq!(m["count"], 3);
}

#[test]
fn reduce_reports_unsatisfiable_formula() {
    let dir = TempDir::new().unwrap();
    let cnf = dir.path().join("php.cnf");
    std::fs::write(&cnf, PIGEONHOLE_CNF).unwrap();
    let r = json(&["reduce", path_str(&cnf), "--verify"]);
    assert_eq!(r["verdict"]["satisfiable"], false);
    assert_eq!(r["verdict"]["consistent"], true);
    assert!(r["verdict"]["mfs_count"].as_u64().unwrap() < 9);
    assert!(r["verdict"]["summary"].as_str().unwrap().contains("unsatisfiable"));
}

#[test]
fn simulate_honest_and_early_reply() {
    let honest = json(&["simulate", "-n", "3", "--trials", "500"]);
    assert_eq!(honest["rate"], 1.0);
    assert_eq!(honest["accepted"], 500);
    let args = ["simulate", "-n", "3", "--trials", "2000", "--adversary", "early-reply", "--seed", "4"];
    let a = json(&args);
    assert_eq!(a, json(&args));
    let rate = a["rate"].as_f64().unwrap();
    assert!(rate > 0.125 && rate < 1.0, "{rate}");
}

#[test]
fn simulate_writes_transcripts() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("s.jsonl");
    json(&["simulate", "-n", "2", "--trials", "50", "--transcripts", path_str(&file), "--transcript-count", "3"]);
    let text = std::fs::read_to_string(&file).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    for (i, t) in lines.iter().enumerate() {
        assert_eq!(t["trial"], i as u64);
        assert_eq!(t["verdict"], "accept");
        assert_eq!(t["rounds"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn bad_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let cnf = dir.path().join("taut.cnf");
    std::fs::write(&cnf, "p cnf 2 1\n1 -1 0\n").unwrap();
    assert_eq!(exit_code(&["reduce", path_str(&cnf)]), 2);
    assert_eq!(exit_code(&["mfs", path_str(&dir.path().join("missing.json")), "-k", "2"]), 2);
    assert_eq!(exit_code(&["generate", "tree", "-n", "2", "--labels", "01x"]), 2);
}

#[test]
fn resource_limits_exit_3() {
    assert_eq!(exit_code(&["df", "brute", "-n", "4"]), 3);
    assert_eq!(exit_code(&["df", "exact-tree", "-n", "13"]), 3);
    assert_eq!(exit_code(&["df", "exact-tree", "-n", "5", "--max-exact-rounds", "4"]), 3);
}
