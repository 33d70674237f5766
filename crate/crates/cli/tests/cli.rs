use std::path::Path;
use std::process::{Command, Output};

use mlquest_core::testkit::broken_specs;
use mlquest_core::LevelFile;

fn ml_quest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ml-quest")).args(args).env_remove("ML_QUEST_DATA_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_then_validate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for level in ["1", "2", "3"] {
        for seed in ["0", "1", "17"] {
            let f = dir.path().join(format!("l{level}-{seed}.json"));
            assert_eq!(ml_quest(&["gen", "--level", level, "--seed", seed, "--out", p(&f)]).status.code(), Some(0));
            let v = ml_quest(&["validate", p(&f)]);
            assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
            assert!(stdout(&v).contains("PASSED"));
        }
    }
}

#[test]
fn broken_specs_fail_with_their_invariant() {
    let dir = tempfile::tempdir().unwrap();
    for (i, b) in broken_specs().into_iter().enumerate() {
        let f = dir.path().join(format!("broken{i}.json"));
        std::fs::write(&f, LevelFile::new(b.spec).to_json()).unwrap();
        let v = ml_quest(&["validate", p(&f)]);
        assert_eq!(v.status.code(), Some(1), "{}", b.invariant);
        assert!(stdout(&v).contains(&format!("{}:", b.invariant)), "{}", stdout(&v));
    }
}

#[test]
fn simulate_is_deterministic_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let camp = dir.path().join("camp");
    assert_eq!(ml_quest(&["gen", "--campaign", p(&camp), "--seed", "5"]).status.code(), Some(0));
    let script = dir.path().join("script.txt");
    let log = dir.path().join("log.json");
    let first = ml_quest(&["simulate", "--campaign", p(&camp), "--autoplay", "--seed", "9", "--script-out", p(&script), "--log-out", p(&log)]);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).contains("completed: true"));
    let again = ml_quest(&["simulate", "--campaign", p(&camp), "--script", p(&script), "--seed", "9"]);
    let third = ml_quest(&["simulate", "--campaign", p(&camp), "--script", p(&script), "--seed", "9"]);
    assert_eq!(stdout(&again), stdout(&third));
    assert_eq!(stdout(&first), stdout(&again));

    let r = ml_quest(&["replay", p(&log)]);
    assert_eq!(r.status.code(), Some(0), "{}", stdout(&r));
    let hash_line = stdout(&first).lines().last().unwrap().to_string();
    assert!(stdout(&r).ends_with(&format!("{}\n", hash_line.trim_start_matches("log_hash: "))));

    let text = std::fs::read_to_string(&log).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["seed"] = serde_json::json!(10);
    std::fs::write(&log, doc.to_string()).unwrap();
    assert_eq!(ml_quest(&["replay", p(&log)]).status.code(), Some(1));
}

#[test]
fn data_dir_env_supplies_the_campaign() {
    let dir = tempfile::tempdir().unwrap();
    ml_quest(&["gen", "--campaign", p(dir.path()), "--seed", "2"]);
    let o = Command::new(env!("CARGO_BIN_EXE_ml-quest"))
        .args(["simulate", "--autoplay", "--seed", "1"])
        .env("ML_QUEST_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("completed: true"));
}

#[test]
fn exit_codes() {
    assert_eq!(ml_quest(&[]).status.code(), Some(64));
    assert_eq!(ml_quest(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(ml_quest(&["gen", "--level", "4"]).status.code(), Some(64));
    assert_eq!(ml_quest(&["--help"]).status.code(), Some(0));
    assert_eq!(ml_quest(&["validate", "/nonexistent/level.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("junk.json");
    std::fs::write(&f, "{\"version\": 1, \"spec\": {\"cheese\": {}}}").unwrap();
    assert_eq!(ml_quest(&["validate", p(&f)]).status.code(), Some(2));
    std::fs::write(&f, "{\"version\": 9, \"spec\": {}}").unwrap();
    assert_eq!(ml_quest(&["validate", p(&f)]).status.code(), Some(2));
    let l1 = dir.path().join("l1.json");
    ml_quest(&["gen", "--level", "1", "--out", p(&l1)]);
    let v = ml_quest(&["validate", p(&l1), "--level", "2"]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).contains("level-mismatch"));
}

#[test]
fn survey_analyze_formats() {
    let csv = concat!(env!("CARGO_MANIFEST_DIR"), "/../survey/data/reconstructed_responses.csv");
    let text = ml_quest(&["survey", "analyze", csv]);
    assert_eq!(text.status.code(), Some(0));
    assert!(stdout(&text).contains("3.87   0.69"));
    let json = ml_quest(&["survey", "analyze", csv, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["demographics"][2]["options"][0]["percent"], 69.6);
    let pop = ml_quest(&["survey", "analyze", csv, "--population-sd", "--include-c"]);
    assert!(stdout(&pop).contains("population SD"));
    assert!(stdout(&pop).lines().any(|l| l.starts_with("C ")));
    assert_eq!(ml_quest(&["survey", "analyze", "/nonexistent.csv"]).status.code(), Some(2));
}
