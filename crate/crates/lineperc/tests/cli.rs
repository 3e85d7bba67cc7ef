use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lineperc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lineperc"))
        .args(args)
        .current_dir(dir)
        .env_remove("LINEPERC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV text without its trailing timestamp column.
fn strip_timestamp(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n").collect()
}

const HEADER: &str = "spec_hash,d,p1,p2,p3,observable,n,N,L,block_n,c,k,replicas,successes,estimate,stderr,master_seed,timestamp";

#[test]
fn trivial_estimate_row_matches_golden_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = lineperc(dir.path(), &["estimate", "--d", "3", "--p", "1,1,1", "--obs", "connection", "--n", "8", "--replicas", "10", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), HEADER);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 18);
    assert_eq!(row[0].len(), 16);
    assert_eq!(&row[1..17], ["3", "1", "1", "1", "connection", "8", "32", "16", "8", "2", "16", "10", "10", "1", "0", "1"]);
    assert!(lines.next().is_none());
}

#[test]
fn four_dimensional_header_widens() {
    let dir = tempfile::tempdir().unwrap();
    let o = lineperc(dir.path(), &["estimate", "--rho", "1", "--d", "4", "--obs", "all-vacant", "--n", "2", "--replicas", "3", "--csv", "out.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(text.starts_with("spec_hash,d,p1,p2,p3,p4,observable,"));
}

#[test]
fn reruns_are_byte_identical_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["scan", "--obs", "crossing", "--rho-list", "0.55,0.7", "--L-list", "4,6", "--replicas", "60", "--seed", "9"];
    let a = lineperc(dir.path(), &[&args[..], &["--threads", "1"]].concat());
    let b = lineperc(dir.path(), &[&args[..], &["--threads", "4"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip_timestamp(&stdout(&a)), strip_timestamp(&stdout(&b)));
    assert_eq!(stdout(&a).lines().count(), 5);
    let c = Command::new(env!("CARGO_BIN_EXE_lineperc"))
        .args(args)
        .current_dir(dir.path())
        .env("LINEPERC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(strip_timestamp(&stdout(&a)), strip_timestamp(&stdout(&c)));
}

#[test]
fn resumed_run_equals_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["estimate", "--obs", "truncated", "--p", "0.3,0.7,0.7", "--n", "3", "--replicas", "500", "--seed", "2"];
    let stopped = lineperc(dir.path(), &[&base[..], &["--resume", "log.jsonl", "--batch", "64", "--stop-after-batches", "3"]].concat());
    assert_eq!(stopped.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&stopped.stderr).contains("--resume log.jsonl"));
    let log = std::fs::read_to_string(dir.path().join("log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 3);
    let resumed = lineperc(dir.path(), &[&base[..], &["--resume", "log.jsonl", "--batch", "64"]].concat());
    let single = lineperc(dir.path(), &base);
    assert_eq!(resumed.status.code(), Some(0));
    assert_eq!(strip_timestamp(&stdout(&resumed)), strip_timestamp(&stdout(&single)));
    // Another experiment cannot resume onto this log.
    let other = lineperc(dir.path(), &["estimate", "--obs", "truncated", "--p", "0.3,0.7,0.7", "--n", "4", "--replicas", "500", "--seed", "2", "--resume", "log.jsonl"]);
    assert_eq!(other.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| lineperc(dir.path(), args).status.code();
    assert_eq!(code(&["estimate", "--obs", "connection"]), Some(2));
    assert_eq!(code(&["estimate", "--obs", "nonsense", "--rho", "0.5"]), Some(2));
    assert_eq!(code(&["estimate", "--obs", "connection", "--p", "0.5,1.5,0.5"]), Some(2));
    assert_eq!(code(&["estimate", "--obs", "truncated", "--rho", "0.5", "--n", "4", "--N", "4"]), Some(2));
    assert_eq!(code(&["estimate", "--config", "missing.ini"]), Some(2));
    assert_eq!(code(&["no-such-command"]), Some(2));
    assert_eq!(code(&["verify-lemma", "nope"]), Some(2));
    assert_eq!(code(&["bisect", "--range", "0.7"]), Some(2));
    assert_eq!(code(&["load", "missing.lpf"]), Some(2));
    assert_eq!(code(&["renorm-scan", "--rho", "0.9", "--block-n", "64", "--k", "64", "--max-sites", "1000"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn config_sections_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.ini"),
        "replicas = 20\nseed = 3\n\n[full]\nobservable = connection\np = 1,1,1\nn = 4\n\n[empty]\nobservable = all-vacant\nrho = 0\nn = 1\n",
    )
    .unwrap();
    let o = lineperc(dir.path(), &["estimate", "--config", "exp.ini"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][5], rows[0][12], rows[0][14]), ("connection", "20", "1"));
    assert_eq!((rows[1][5], rows[1][14]), ("all-vacant", "0"));
    let o = lineperc(dir.path(), &["estimate", "--config", "exp.ini", "--section", "full", "--replicas", "7", "--n", "2"]);
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[6], row[12], row[16]), ("2", "7", "3"));
    assert_eq!(lineperc(dir.path(), &["estimate", "--config", "exp.ini", "--section", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_lemma_suites_report_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    for (args, instances) in [
        (vec!["verify-lemma", "duality", "--instances", "10000", "--seed", "3"], 10000),
        (vec!["verify-lemma", "path-product", "--instances", "1000", "--max-h", "4"], 1000),
        (vec!["verify-lemma", "bridge", "--n", "2", "--all-open"], 6),
    ] {
        let o = lineperc(dir.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let rep: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(rep["violations"], 0);
        assert_eq!(rep["instances"], instances);
        assert!(rep["first_counterexample"].is_null());
        if args[1] == "path-product" {
            let r = rep["equality_rate"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&r));
        }
    }
}

#[test]
fn path_pair_fixture_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.txt"), "0 0 0\n1 0 0\n1 0 1\n1 0 2\n").unwrap();
    std::fs::write(dir.path().join("b.txt"), "0 0 0\n0 0 1\n0 1 1\n0 1 2\n").unwrap();
    let o = lineperc(dir.path(), &["verify-lemma", "path-product", "--pair", "a.txt", "b.txt"]);
    assert_eq!(o.status.code(), Some(0));
    // Different end heights: not a compatible pair.
    std::fs::write(dir.path().join("c.txt"), "0 0 0\n0 0 1\n").unwrap();
    let o = lineperc(dir.path(), &["verify-lemma", "path-product", "--pair", "a.txt", "c.txt"]);
    assert_eq!(o.status.code(), Some(3));
    let rep: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep["violations"], 1);
    assert!(rep["first_counterexample"]["error"].is_string());
}

#[test]
fn renorm_scan_all_open_always_crosses() {
    let dir = tempfile::tempdir().unwrap();
    let o = lineperc(dir.path(), &["renorm-scan", "--rho", "1", "--block-n", "3", "--k", "5", "--replicas", "4", "--json", "r.json", "--path-out", "p.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let scan = &rep["scans"][0];
    assert_eq!(scan["frequency"], 1.0);
    assert_eq!(scan["fully_open_paths"], 4);
    let path = std::fs::read_to_string(dir.path().join("p.txt")).unwrap();
    let first: Vec<i64> = path.lines().next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
    let last: Vec<i64> = path.lines().last().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
    assert_eq!(first[2], 0);
    assert_eq!(last[2], 12);
    // One row of blocks: crossing exactly when a block of the row is good.
    let o = lineperc(dir.path(), &["renorm-scan", "--p", "0.5,0.8,0.8", "--block-n", "3", "--k", "1", "--replicas", "30", "--json", "k1.json"]);
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("k1.json")).unwrap()).unwrap();
    let scan = &rep["scans"][0];
    assert_eq!(scan["width"], 1);
    assert_eq!(scan["frequency"], scan["good_block_fraction"]);
}

#[test]
fn dump_then_load() {
    let dir = tempfile::tempdir().unwrap();
    let o = lineperc(dir.path(), &["dump", "--rho", "1", "--L", "3", "--seed", "5", "--out", "c.lpf"]);
    assert_eq!(o.status.code(), Some(0));
    let o = lineperc(dir.path(), &["load", "c.lpf"]);
    assert_eq!(o.status.code(), Some(0));
    let s: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((s["sites"].as_u64(), s["open_sites"].as_u64(), s["clusters"].as_u64()), (Some(343), Some(343), Some(1)));
    assert_eq!(s["origin_reaches_boundary"], true);
    std::fs::write(dir.path().join("bad.lpf"), b"LPF2....").unwrap();
    assert_eq!(lineperc(dir.path(), &["load", "bad.lpf"]).status.code(), Some(2));
}

#[test]
fn decay_fit_writes_svg_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = lineperc(
        dir.path(),
        &["decay-fit", "--obs", "truncated", "--p", "0.3,0.7,0.7", "--n-list", "2,3,4,5,6", "--replicas", "4000", "--svg", "d.svg", "--json", "d.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("d.svg")).unwrap();
    assert!(svg.contains("log-linear") && svg.contains("log-log"));
    assert_eq!(svg.matches("<circle").count(), 10);
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(rep["rows"].as_array().unwrap().len(), 5);
    assert!(rep["report"]["fit"]["exponential"]["rate"].as_f64().unwrap() > 0.0);
}

#[test]
fn bisect_reports_interval() {
    let dir = tempfile::tempdir().unwrap();
    let o = lineperc(dir.path(), &["bisect", "--obs", "crossing", "--L", "8", "--range", "0.4,0.9", "--tol", "0.05", "--replicas", "100", "--seed", "7", "--json", "b.json"]);
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    let (lo, hi) = (rep["report"]["lo"].as_f64().unwrap(), rep["report"]["hi"].as_f64().unwrap());
    assert!(0.4 <= lo && lo < hi && hi <= 0.9 && hi - lo <= 0.05);
    assert_eq!(rep["report"]["bracket"], "Inside");
}
