use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pdtsp::exact::brute_force;
use pdtsp::learn::load_checkpoint;
use pdtsp::{Instance, Tour};
use tempfile::TempDir;

fn pdtsp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdtsp")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = pdtsp(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn generate(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    ok(&["generate", "-n", &n.to_string(), "--seed", &seed.to_string(), "-o", name], dir);
    dir.join(name)
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("valid json")
}

fn parse_tour(text: &str) -> Tour {
    let nodes: Vec<usize> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!((nodes[0], *nodes.last().unwrap()), (0, 0));
    let seq = &nodes[1..nodes.len() - 1];
    Tour::from_sequence(seq, seq.len() / 2).expect("feasible tour")
}

#[test]
fn generate_round_trips_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = generate(dir.path(), "a.pdtsp", 5, 42);
    let b = generate(dir.path(), "b.pdtsp", 5, 42);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(b).unwrap());
    assert_eq!(Instance::parse(&text).unwrap().n(), 5);
}

#[test]
fn generate_zero_pairs_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = pdtsp(&["generate", "-n", "0", "-o", "z.pdtsp"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InvalidSize"));
    assert!(!dir.path().join("z.pdtsp").exists());
}

#[test]
fn overwrite_needs_force() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "a.pdtsp", 3, 1);
    assert_eq!(pdtsp(&["generate", "-n", "3", "-o", "a.pdtsp"], dir.path()).status.code(), Some(2));
    ok(&["generate", "-n", "3", "--seed", "9", "-o", "a.pdtsp", "--force"], dir.path());
}

#[test]
fn unknown_method_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "a.pdtsp", 3, 1);
    assert_eq!(pdtsp(&["solve", "a.pdtsp", "--method", "simplex"], dir.path()).status.code(), Some(2));
    assert_eq!(pdtsp(&["solve", "missing.pdtsp", "--method", "n1"], dir.path()).status.code(), Some(2));
}

#[test]
fn exact_solve_matches_the_library() {
    let dir = TempDir::new().unwrap();
    let path = generate(dir.path(), "a.pdtsp", 5, 42);
    let inst = Instance::parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    let oracle = brute_force(&inst).unwrap();
    let solved = json(&ok(&["solve", "a.pdtsp", "--method", "exact"], dir.path()));
    assert_eq!(solved["cost"].as_f64().unwrap(), oracle.cost);
    assert_eq!(parse_tour(solved["tour"].as_str().unwrap()), oracle.tour);
    let record = json(&ok(&["exact", "a.pdtsp", "--mode", "bnb"], dir.path()));
    assert_eq!(record["cost"].as_f64().unwrap(), oracle.cost);
    assert_eq!(record["examined"], "113400");
    assert_eq!(record["n"], 5);
}

#[test]
fn exact_enforces_the_cap() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "a.pdtsp", 4, 0);
    let out = pdtsp(&["exact", "a.pdtsp", "--cap", "3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn greedy_is_deterministic_and_writes_artifacts() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "a.pdtsp", 5, 42);
    let args = ["solve", "a.pdtsp", "--method", "greedy", "--restarts", "20", "--seed", "1"];
    let first = json(&ok(&args, dir.path()));
    let second = json(&ok(&args, dir.path()));
    assert_eq!(first["tour"], second["tour"]);
    assert_eq!(first["cost"], second["cost"]);
    let mut with_files = args.to_vec();
    with_files.extend(["--out", "t.txt", "--trace", "trace.csv"]);
    ok(&with_files, dir.path());
    let tour = std::fs::read_to_string(dir.path().join("t.txt")).unwrap();
    assert_eq!(tour.trim(), first["tour"].as_str().unwrap());
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("episode,best_cost\n"));
    assert_eq!(trace.lines().count(), 21);
}

#[test]
fn every_method_emits_a_feasible_tour() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "a.pdtsp", 4, 3);
    for method in ["greedy", "random", "naive", "n1", "n2", "n3", "b1", "b2", "insertion", "exact"] {
        let out = json(&ok(&["solve", "a.pdtsp", "--method", method, "--episodes", "3"], dir.path()));
        assert_eq!(out["method"], method);
        parse_tour(out["tour"].as_str().unwrap());
        assert!(out["cost"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn l2t_tour_passes_the_audit() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "a.pdtsp", 5, 42);
    let out = json(&ok(&["solve", "a.pdtsp", "--method", "l2t", "--episodes", "500", "--width", "64"], dir.path()));
    let tour = parse_tour(out["tour"].as_str().unwrap());
    let inst = Instance::parse(&std::fs::read_to_string(dir.path().join("a.pdtsp")).unwrap()).unwrap();
    assert!((tour.cost(&inst).unwrap() - out["cost"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn train_writes_report_curve_and_checkpoint() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "a.pdtsp", 3, 5);
    let args = ["train", "a.pdtsp", "--episodes", "5", "--width", "16", "--history", "2", "--eps-conv", "0"];
    let mut full = args.to_vec();
    full.extend(["--out", "r.json", "--trace", "c.csv", "--checkpoint", "net.bin"]);
    ok(&full, dir.path());
    let report = json(&std::fs::read_to_string(dir.path().join("r.json")).unwrap());
    assert_eq!(report["episodes_run"], 5);
    let curve = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(curve.lines().count(), 6);
    let net = load_checkpoint(dir.path().join("net.bin")).unwrap();
    assert_eq!((net.width(), net.history()), (16, 2));
    assert_eq!(pdtsp(&full, dir.path()).status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "a.pdtsp", 3, 2);
    std::fs::write(dir.path().join("run.cfg"), "seed = 7\nepisodes = 2\n").unwrap();
    let from_file = json(&ok(&["--config", "run.cfg", "solve", "a.pdtsp", "--method", "n3"], dir.path()));
    assert_eq!(from_file["seed"], 7);
    assert!(from_file["extra"].as_str().unwrap().starts_with("episodes=2;"));
    let flagged = json(&ok(&["--config", "run.cfg", "solve", "a.pdtsp", "--method", "n3", "--seed", "8"], dir.path()));
    assert_eq!(flagged["seed"], 8);
    std::fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    let bad = pdtsp(&["--config", "bad.cfg", "solve", "a.pdtsp", "--method", "n3"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_quick_passes() {
    let dir = TempDir::new().unwrap();
    let out = pdtsp(&["verify", "quick"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("count_feasible(2) = 6"));
    for id in ["counting", "n1-feasibility", "n2-feasibility", "n3-feasibility", "b1-feasibility", "b2-feasibility"] {
        assert!(text.contains(id), "{id} missing");
    }
}

#[test]
fn verify_catches_an_injected_fault() {
    let dir = TempDir::new().unwrap();
    let out = pdtsp(&["verify", "quick", "--inject-fault", "n2-precondition"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL n2-feasibility"));
}

#[test]
fn bench_greedy_never_beats_exact() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "two.pdtsp", 2, 11);
    let csv = ok(&["bench", "two.pdtsp", "--methods", "greedy,exact", "--seeds", "5", "--no-timing"], dir.path());
    let mut rows = csv::Reader::from_reader(csv.as_bytes());
    let headers = rows.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["method", "instance", "n", "cost", "seconds", "seed", "extra"]);
    let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 10);
    let cost = |r: &csv::StringRecord| r[3].parse::<f64>().unwrap();
    let exact = cost(records.iter().find(|r| &r[0] == "exact").unwrap());
    for r in records.iter().filter(|r| &r[0] == "greedy") {
        assert!(cost(r) >= exact - 1e-12);
    }
}

#[test]
fn bench_l2t_matches_or_beats_n1_on_three_pairs() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "three.pdtsp", 3, 13);
    let csv = ok(&["bench", "three.pdtsp", "--methods", "n1,l2t", "--seeds", "20", "--width", "64", "--no-timing"], dir.path());
    let records: Vec<csv::StringRecord> =
        csv::Reader::from_reader(csv.as_bytes()).records().map(Result::unwrap).collect();
    let by = |m: &str| -> Vec<f64> { records.iter().filter(|r| &r[0] == m).map(|r| r[3].parse().unwrap()).collect() };
    let (l2t, n1) = (by("l2t"), by("n1"));
    assert_eq!((l2t.len(), n1.len()), (20, 20));
    let wins = l2t.iter().zip(&n1).filter(|(a, b)| **a <= **b + 1e-12).count();
    assert!(wins >= 18, "l2t matched or beat n1 in {wins}/20 seeds");
}

#[test]
fn bench_is_sorted_byte_stable_and_records_failures() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "b.pdtsp", 3, 1);
    generate(dir.path(), "a.pdtsp", 2, 1);
    std::fs::write(dir.path().join("broken.pdtsp"), "not an instance\n").unwrap();
    let args = ["bench", ".", "--methods", "random,b2", "--seeds", "2", "--no-timing", "--episodes", "3"];
    let first = ok(&args, dir.path());
    assert_eq!(first, ok(&args, dir.path()));
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 2 * 2);
    let keys: Vec<(String, String)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].to_string(), f[0].to_string())
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let broken: Vec<&&str> = lines.iter().filter(|l| l.contains(",broken,")).collect();
    assert_eq!(broken.len(), 4);
    assert!(broken.iter().all(|l| l.contains("status=error")));
}

#[test]
fn bench_without_instances_is_header_only() {
    let dir = TempDir::new().unwrap();
    ok(&["bench", "--methods", "greedy", "--out", "empty.csv"], dir.path());
    let text = std::fs::read_to_string(dir.path().join("empty.csv")).unwrap();
    assert_eq!(text, "method,instance,n,cost,seconds,seed,extra\n");
}
