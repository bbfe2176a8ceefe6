use std::path::PathBuf;
use std::process::{Command, Output};

fn machine(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("machines").join(name).display().to_string()
}

fn tmkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmkit")).args(args).env_remove("TMKIT_BACKEND").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classify_exit_codes() {
    assert_eq!(tmkit(&["classify", &machine("flipper.tm")]).status.code(), Some(0));
    let o = tmkit(&["classify", &machine("direction_collision.tm")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("enter q0 moving R and L"));
    let o = tmkit(&["classify", &machine("leaky_walker.tm")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("warning: substochastic row (q0, 0) sums to 3/4"));
}

#[test]
fn literal_flag_rejects_total_machines() {
    let o = tmkit(&["classify", "--literal-reversibility", &machine("right_mover.tm")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("reversible (literal): no"));
}

#[test]
fn check_quantum() {
    assert_eq!(tmkit(&["check", &machine("hadamard_walk.tm")]).status.code(), Some(0));
    assert_eq!(tmkit(&["check", &machine("lopsided_coin.tm")]).status.code(), Some(1));
    assert_eq!(tmkit(&["check", &machine("dropped_branch.tm")]).status.code(), Some(1));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(tmkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tmkit(&["check", "/nonexistent.tm"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tm");
    std::fs::write(&bad, "machine x\nkind deterministic\nstates q0\nrule q0 0 -> 0 Q q0\n").unwrap();
    let o = tmkit(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":4:16: error: bad direction"));
    assert_eq!(tmkit(&["evolve", &machine("flipper.tm"), "--steps", "1"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_tmkit"))
        .args(["evolve", &machine("identity.tm"), "--steps", "1"])
        .env("TMKIT_BACKEND", "quad")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_and_back() {
    let o = tmkit(&["run", &machine("increment.tm"), "--input", "1101"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("halted halt-state\n"));
    let o = tmkit(&["back", &machine("flipper.tm"), "--config", r#"{"head":1,"state":"b","tape":{"0":1}}"#]);
    assert_eq!(stdout(&o).trim(), r#"{"head":0,"state":"a","tape":{}}"#);
    let o = tmkit(&["back", &machine("flipper.tm"), "--config", "{"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = ["run", &machine("fair_coin.tm"), "--steps", "50", "--seed", "17", "--json"];
    let (a, b) = (tmkit(&args), tmkit(&args));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("\"halted\": \"step-limit\""));
}

#[test]
fn evolve_and_element() {
    let o = tmkit(&["evolve", &machine("hadamard_coin.tm"), "--steps", "1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("\"re\": \"1/2*sqrt2\"").count(), 2);
    let o = tmkit(&[
        "element",
        &machine("hadamard_coin.tm"),
        "--from",
        r#"{"head":0,"proc":"0","tape":{}}"#,
        "--to",
        r#"{"head":1,"proc":"0","tape":{"0":1}}"#,
    ]);
    assert_eq!(stdout(&o).trim(), "1/2*sqrt2");
    let o = Command::new(env!("CARGO_BIN_EXE_tmkit"))
        .args(["evolve", &machine("hadamard_walk.tm"), "--steps", "3"])
        .env("TMKIT_BACKEND", "float")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("backend float"));
}

#[test]
fn lift_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lifted.tm");
    let o = tmkit(&["lift", &machine("flipper.tm"), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dump = dir.path().join("m.txt");
    let o = tmkit(&["verify", out.to_str().unwrap(), "--window", "2", "--exact", "--matrix-dump", dump.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("agreement: yes"));
    let text = std::fs::read_to_string(dump).unwrap();
    assert!(text.starts_with("# tmkit truncated matrix L=2 k=1 ordering=v1 rows=320 cols=192 nonzeros=192"));
    assert_eq!(tmkit(&["lift", &machine("constant_writer.tm"), "-o", out.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn verify_reports_both_verdicts() {
    let o = tmkit(&["verify", &machine("lopsided_coin.tm"), "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("local: not well-formed") && s.contains("columns not orthonormal") && s.contains("agreement: yes"));
    let o = tmkit(&["verify", &machine("direction_collision.tm"), "--window", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("agreement: yes"));
    assert_eq!(tmkit(&["verify", &machine("identity.tm"), "--window", "1"]).status.code(), Some(2));
}
