use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wordcase"));
    c.env_remove("WORDCASE_CUTOFF").env_remove("WORDCASE_STEP_CAP");
    c
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_prints_answer_and_steps() {
    let o = run(&["solve", "--pipeline", "braid:4", "--word", "1 2 -1 -2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("answer: NotInLanguage"), "{out}");
    assert!(out.contains("T: "));
    let o = run(&["solve", "--pipeline", "surface", "--word", "a b a' b' c d c' d'"]);
    assert!(stdout(&o).contains("answer: InLanguage"));
}

#[test]
fn verify_sc_reports_pieces() {
    let o = run(&["verify-sc", "--presentation", data("surface.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("max piece: 1") && out.contains("PASS"), "{out}");
    let o = run(&["verify-sc", "--presentation", data("abab.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(run(&["bench-avg", "--pipeline", "surface"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--pipeline", "nope", "--word", "a"]).status.code(), Some(2));
    assert_eq!(run(&["bench-avg", "--measure", "cauchy", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(run(&["bench-avg", "--measure", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--pipeline", "free", "--word", "z"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn step_cap_exits_three() {
    let o = bin()
        .args(["solve", "--pipeline", "surface", "--word", "a b a' b' c d"])
        .env("WORDCASE_STEP_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = run(&[
        "bench-avg",
        "--pipeline",
        "surface",
        "--measure",
        "cauchy",
        "--lengths",
        "8",
        "--samples",
        "10",
        "--step-cap",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["density", "--pipeline", "free", "--n", "20"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bench_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"pipeline": "braid:4", "measures": ["cauchy", "geom:0.9"], "lengths": [4, 8, 16, 32], "samples": 300, "seed": 11}"#,
    )
    .unwrap();
    let mut csvs = Vec::new();
    for i in 0..2 {
        let stem = dir.path().join(format!("run{i}"));
        let o = run(&["bench-avg", "--config", config.to_str().unwrap(), "--output", stem.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push(std::fs::read(stem.with_extension("csv")).unwrap());
        let json: serde_json::Value =
            serde_json::from_slice(&std::fs::read(stem.with_extension("json")).unwrap()).unwrap();
        assert_eq!(json["table"]["metadata"]["seed"], 11);
        assert_eq!(json["measures"].as_array().unwrap().len(), 2);
    }
    assert_eq!(csvs[0], csvs[1]);
    let header = String::from_utf8(csvs[0].clone()).unwrap();
    assert!(header.starts_with("n,samples,mean_T,ci_half,max_T,undecided_frac,ratio\n"));
    assert_eq!(header.lines().count(), 5);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"pipeline": "surface", "lengths": [4, 8], "samples": 50}"#).unwrap();
    let o = run(&["bench-generic", "--config", config.to_str().unwrap(), "--lengths", "4,6,8,10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).count(), 4);
    std::fs::write(&config, r#"{"pipeline": "surface", "typo": 1}"#).unwrap();
    assert_eq!(run(&["bench-generic", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn density_walk_and_membership() {
    let out = stdout(&run(&["density", "--pipeline", "free", "--n", "4"]));
    assert!(out.contains("33/341"), "{out}");
    let out = stdout(&run(&["walk", "--graph", "free:2", "--steps", "4"]));
    assert!(out.contains("4,0.109375,7/64"), "{out}");
    let o = run(&[
        "membership",
        "--subgroup",
        data("subgroup.txt").to_str().unwrap(),
        "--word",
        "b",
        "--word",
        "a b",
        "--word",
        "a",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("b: NotInLanguage"));
    assert!(out.contains("a b: InLanguage"));
    assert!(out.contains("a: NotInLanguage"));
}
