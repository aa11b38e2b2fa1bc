use std::path::Path;
use std::process::{Command, Output};

fn liargame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liargame"))
        .args(args)
        .env_remove("LIARGAME_CAP")
        .env_remove("LIARGAME_NODES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

fn write_channel(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn solve_small_symmetric_game() {
    let o = liargame(&["solve", "--preset", "sym1", "--n", "2", "--q", "3", "--variant", "original", "--mode", "adaptive"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Paul");
    let o = liargame(&["solve", "--preset", "sym1", "--n", "3", "--q", "3", "--variant", "original"]);
    assert_eq!(o.status.code(), Some(0), "Carole winning is still a computed result");
    assert_eq!(stdout(&o).trim(), "Carole");
}

#[test]
fn channel_file_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_channel(dir.path(), "sym1.json", r#"{"t": 2, "strings": [[], [[0,1]], [[1,0]]]}"#);
    let o = liargame(&["--json", "solve", "--channel", &path, "--n", "2", "--q", "3", "--variant", "original"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["winner"], "Paul");
}

#[test]
fn empty_search_space_is_vacuous() {
    let o = liargame(&["solve", "--preset", "sym2", "--n", "0", "--q", "2", "--variant", "original"]);
    assert_eq!(stdout(&o).trim(), "Paul");
}

#[test]
fn degenerate_channel_reports_constant_answer() {
    let o = liargame(&["--json", "solve", "--preset", "forced", "--n", "3", "--q", "3", "--variant", "pathological"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["winner"], "Carole");
    assert_eq!(v["degenerate_witness"]["letter"], 0);
    assert_eq!(v["degenerate_witness"]["winner"], "Carole");
}

#[test]
fn maxn_and_its_neighbours() {
    let o = liargame(&["maxn", "--preset", "sym1", "--q", "3", "--variant", "original", "--mode", "adaptive"]);
    assert_eq!(stdout(&o).trim(), "2");
    for q in 3..=6 {
        let o = liargame(&["--json", "maxn", "--preset", "sym1", "--q", &q.to_string(), "--variant", "original"]);
        let n = json(&o)["threshold"]["n"].as_u64().unwrap();
        let at = |n: u64| {
            let o = liargame(&["solve", "--preset", "sym1", "--n", &n.to_string(), "--q", &q.to_string(), "--variant", "original"]);
            stdout(&o).trim().to_string()
        };
        assert_eq!(at(n), "Paul", "q = {q}");
        assert_eq!(at(n + 1), "Carole", "q = {q}");
    }
}

#[test]
fn synth_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("strategy.json").display().to_string();
    let params = ["--q1", "8", "--q2", "6", "--m1", "1", "--m2", "1", "--eta1", "0.1", "--eta2", "1", "--alpha", "2"];
    let mut args = vec!["--json", "synth", "--preset", "sym1", "--variant", "original", "--out", &out];
    args.extend(params);
    let o = liargame(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["n"], 364);
    assert_eq!(v["verified"], true);

    let o = liargame(&["verify", "--preset", "sym1", "--strategy", &out, "--variant", "original"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("pass"));

    let o = liargame(&["--json", "adversary", "--preset", "sym1", "--strategy", &out, "--variant", "original"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o).is_null());

    // The same strategy does not survive a channel with more lies.
    let o = liargame(&["verify", "--preset", "sym2", "--strategy", &out, "--variant", "original"]);
    assert_eq!(o.status.code(), Some(1));
    let o = liargame(&["--json", "adversary", "--preset", "sym2", "--strategy", &out, "--variant", "original"]);
    assert!(json(&o)["survivors"].as_array().unwrap().len() >= 2);
}

#[test]
fn failed_conditions_print_report_and_exit_one() {
    let o = liargame(&["synth", "--preset", "sym1", "--variant", "original", "--q1", "3", "--q2", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["original"], "false");
}

#[test]
fn sphere_bound_row() {
    let o = liargame(&["bounds", "--q", "64", "--k", "1", "--t", "2", "--Ek", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,q1,q2,name,value,lo,hi"));
    // 2^65 / (2 * 64)
    assert_eq!(lines.next(), Some("64,56,8,sphere_bound,288230376151711744,288230376151711744,288230376151711744"));
}

#[test]
fn bounds_with_constants() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_channel(dir.path(), "c.json", r#"{"c2": 5.0, "c3": 5.0}"#);
    let o = liargame(&["--json", "bounds", "--q", "64,256", "--k", "1", "--t", "2", "--Ek", "2", "--constants", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = json(&o)["rows"].as_array().unwrap().clone();
    let names: Vec<_> = rows.iter().map(|r| r["name"].as_str().unwrap().to_string()).collect();
    assert!(names.iter().any(|n| n == "paul_original_max_n"));
    assert!(names.iter().any(|n| n == "paul_pathological_min_n"));
}

#[test]
fn exit_codes() {
    let o = liargame(&["solve", "--preset", "nope", "--n", "1", "--q", "1", "--variant", "original"]);
    assert_eq!(o.status.code(), Some(3));
    let o = liargame(&["--max-space", "4", "solve", "--preset", "sym1", "--n", "2", "--q", "5", "--variant", "original", "--mode", "two-batch", "--q1", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_liargame"))
        .args(["solve", "--preset", "sym1", "--n", "2", "--q", "5", "--variant", "original", "--mode", "two-batch", "--q1", "4"])
        .env("LIARGAME_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "cap from the environment");
    let dir = tempfile::tempdir().unwrap();
    let bad = write_channel(dir.path(), "bad.json", r#"{"t": 2, "strings": [[[0,0]]]}"#);
    let o = liargame(&["solve", "--channel", &bad, "--n", "1", "--q", "1", "--variant", "original"]);
    assert_eq!(o.status.code(), Some(3));
    let o = liargame(&["solve", "--channel", "/nonexistent/c.json", "--n", "1", "--q", "1", "--variant", "original"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn two_batch_strategy_out_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json").display().to_string();
    let o = liargame(&["solve", "--preset", "sym1", "--n", "2", "--q", "4", "--variant", "original", "--mode", "two-batch", "--q1", "2", "--strategy-out", &out]);
    assert_eq!(stdout(&o).trim(), "Paul");
    let o = liargame(&["verify", "--preset", "sym1", "--strategy", &out, "--variant", "original"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn carole_thresholds() {
    let o = liargame(&["--json", "adversary", "--preset", "sym1", "--threshold", "--q1", "8", "--q2", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["values"]["carole_pathological_max_n_exclusive"]["lo"].is_string());
}

#[test]
fn selftest_is_deterministic() {
    let a = liargame(&["--json", "selftest", "--seed", "7", "--cases", "40"]);
    let b = liargame(&["--json", "selftest", "--seed", "7", "--cases", "40"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
