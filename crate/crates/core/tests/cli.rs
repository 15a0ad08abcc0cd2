use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uneq")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tmp(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("uneq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_un_exit_codes() {
    assert_eq!(code(&run(&["check-un", &data("un.trs")])), 0);
    assert_eq!(code(&run(&["check-un", &data("klop.trs")])), 10);
    assert_eq!(code(&run(&["check-un", &data("example.trs"), "--sequential"])), 10);
    assert_eq!(code(&run(&["check-un", &data("bad.trs")])), 2);
    assert_eq!(code(&run(&["check-un", "/nonexistent.trs"])), 2);
}

#[test]
fn check_un_json_is_deterministic() {
    let a = run(&["check-un", &data("example.trs"), "--json"]);
    let b = run(&["check-un", &data("example.trs"), "--json", "--sequential"]);
    assert_eq!(stdout(&a), stdout(&b));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["status"], "not-UN=");
    assert_eq!(v["k"], 3);
    assert_eq!(v["witness"]["left"], "c");
    assert_eq!(v["witness"]["trace"]["lowered"], true);
    let klop: Value = serde_json::from_str(&stdout(&run(&["check-un", &data("klop.trs"), "--json"]))).unwrap();
    assert_eq!(klop["witness"]["trace"]["steps"].as_array().unwrap().len(), 4);
}

#[test]
fn errors_carry_codes() {
    let out = run(&["check-un", &data("bad.trs"), "--json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["error"]["code"], "variable-as-lhs");
    let f = tmp("arity.trs", "f(a) -> b\nf(a,b) -> b\n");
    let out = run(&["check-un", &f]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[arity-conflict]"));
    let f = tmp("syntax.trs", "f(a -> b\n");
    let out = run(&["word", &f, "a", "b"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[syntax-error]"));
    let deep = tmp("deep.trs", "vars x\nf(g(x)) -> x\n");
    let out = run(&["check-un", &deep]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[not-shallow]"));
}

#[test]
fn word_verdicts() {
    let out = run(&["word", &data("example.trs"), "c", "g(h(h(c)),x)"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("3 steps over saturated equations"));
    assert!(text.contains("4 rule steps"));
    let out = run(&["word", &data("un.trs"), "1", "f(1)"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("not equivalent (per decision procedure)"));
    let out = run(&["word", &data("klop.trs"), "b", "e", "--oracle", "--json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["method"], "oracle");
    let out = run(&["word", &data("klop.trs"), "b", "e", "--oracle", "--step-cap", "2"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("unknown"));
    // Non-flat systems always go through the bounded search.
    let out = run(&["word", &data("shallow.trs"), "f(a,g(g(a)))", "a", "--json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["method"], "oracle");
}

#[test]
fn closure_flatten_and_nf() {
    let out = stdout(&run(&["closure", &data("example.trs")]));
    assert!(out.contains("c = g(a,v0)"));
    assert_eq!(out.lines().count(), 5);
    let out = stdout(&run(&["flatten", &data("shallow.trs")]));
    assert!(out.contains("f(x,c2) -> x"));
    assert!(out.contains("# c2 ≡ g(g(a))"));
    let out = run(&["nf", &data("un.trs"), "--max-height", "1"]);
    assert_eq!(stdout(&out), "1\nf(1)\ng(1)\n");
    let out = run(&["nf", &data("un.trs"), "--max-height", "4", "--cap", "10"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap-exceeded"));
}

#[test]
fn pcp_commands() {
    let tiles = data("three_tiles.pcp");
    assert_eq!(code(&run(&["pcp", "check", &tiles, "--solution", "3,2,3,1"])), 0);
    assert_eq!(code(&run(&["pcp", "check", &tiles, "--solution", "1,2"])), 1);
    assert_eq!(code(&run(&["pcp", "check", &tiles, "--solution", "4"])), 2);
    let out = run(&["pcp", "derive", &tiles, "--solution", "1,2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not-a-solution"));
    let rules = stdout(&run(&["pcp", "gen", &tiles, "--variant", "left-flat"]));
    assert!(rules.contains("j1(x) -> h(x,∅,∅)"));
}

#[test]
fn traces_round_trip_through_verify() {
    let tiles = data("three_tiles.pcp");
    for variant in ["right-flat", "left-flat"] {
        let system = tmp(
            &format!("{variant}.trs"),
            &stdout(&run(&["pcp", "gen", &tiles, "--variant", variant])),
        );
        let trace = tmp(
            &format!("{variant}.json"),
            &stdout(&run(&[
                "pcp",
                "derive",
                &tiles,
                "--solution",
                "3,2,3,1",
                "--variant",
                variant,
                "--json",
            ])),
        );
        let out = run(&["trace", "verify", &system, &trace]);
        assert_eq!(code(&out), 0, "{variant}: {}", stdout(&out));
    }
    let word: Value = serde_json::from_str(&stdout(&run(&[
        "word",
        &data("example.trs"),
        "c",
        "g(h(h(c)),x)",
        "--json",
    ])))
    .unwrap();
    let lowered = tmp("lowered.json", &word["trace"].to_string());
    let unlowered = tmp("unlowered.json", &word["equation_trace"].to_string());
    assert_eq!(code(&run(&["trace", "verify", &data("example.trs"), &lowered])), 0);
    assert_eq!(code(&run(&["trace", "verify", &data("example.trs"), &unlowered])), 0);
    // The same steps do not prove anything in another system.
    assert_eq!(code(&run(&["trace", "verify", &data("klop.trs"), &lowered])), 1);
    let garbage = tmp("garbage.json", "{\"steps\": 3}");
    assert_eq!(code(&run(&["trace", "verify", &data("example.trs"), &garbage])), 2);
}
