//! End-to-end runs of the binary: every exit code in the contract, each
//! output format, and the resolution rules for derivation and lasso
//! arguments.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../abc/corpus")
        .join(name);
    path.to_str().expect("utf-8 path").to_string()
}

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    path.to_str().expect("utf-8 path").to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abc")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let holds = run(&[
        "check",
        &corpus("direct-send.abc"),
        "--ltl",
        "G (<a> => F <d!>)",
        "--stem",
        "4",
        "--cycle",
        "4",
        "--finlen",
        "6",
    ]);
    assert_eq!(holds.status.code(), Some(0), "{}", stdout(&holds));
    assert!(stdout(&holds).contains("holds"));

    let fails = run(&[
        "check",
        &corpus("procrastinator.abc"),
        "--ltl",
        "G (<a> => F <d!>)",
        "--stem",
        "4",
        "--cycle",
        "4",
        "--finlen",
        "6",
    ]);
    assert_eq!(fails.status.code(), Some(1));
    let text = stdout(&fails);
    assert!(text.contains("fails") && text.contains("tau"), "{text}");

    let unknown = run(&[
        "check",
        &fixture("fork-bomb.abc"),
        "--ltl",
        "F <b!>",
        "--max-states",
        "20",
    ]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stdout(&unknown).contains("unknown"));

    let bad_formula = run(&["check", &corpus("direct-send.abc"), "--ltl", "G (<a> =>"]);
    assert_eq!(bad_formula.status.code(), Some(3));

    let missing_file = run(&["check", "no-such-file.abc", "--ltl", "F <d!>"]);
    assert_eq!(missing_file.status.code(), Some(3));
}

#[test]
fn check_renders_the_documented_json_schema() {
    let out = run(&[
        "check",
        &corpus("procrastinator.abc"),
        "--ltl",
        "G (<a> => F <d!>)",
        "--stem",
        "4",
        "--cycle",
        "4",
        "--finlen",
        "6",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["status"], "fails");
    assert_eq!(doc["bounds"]["stem"], 4);
    assert!(doc["counterexample"].as_str().expect("rendered path").contains("tau"));

    let out = run(&[
        "check",
        &corpus("direct-send.abc"),
        "--ltl",
        "G (<a> => F <d!>)",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["status"], "holds");
    assert!(doc.get("counterexample").is_none());
}

#[test]
fn fairness_files_change_the_verdict() {
    let without = run(&[
        "check",
        &corpus("procrastinator-signals.abc"),
        "--ltl",
        "G (<a> => F <d!>)",
        "--stem",
        "4",
        "--cycle",
        "4",
        "--finlen",
        "6",
    ]);
    assert_eq!(without.status.code(), Some(1));

    let with = run(&[
        "check",
        &corpus("procrastinator-signals.abc"),
        "--ltl",
        "G (<a> => F <d!>)",
        "--fair",
        &corpus("procrastinator-signals.fair"),
        "--stem",
        "4",
        "--cycle",
        "4",
        "--finlen",
        "6",
    ]);
    assert_eq!(with.status.code(), Some(0), "{}", stdout(&with));
}

#[test]
fn lts_emits_dot_json_and_text() {
    let dot = run(&["lts", &corpus("nil.abc")]);
    assert_eq!(dot.status.code(), Some(0));
    let text = stdout(&dot);
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches("label=").count(), 1, "one node, no edges: {text}");

    let json = run(&["lts", &corpus("two-sends.abc"), "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).expect("valid json");
    assert_eq!(doc["init"], 0);
    assert_eq!(doc["states"].as_array().expect("states").len(), 3);
    assert_eq!(doc["edges"].as_array().expect("edges").len(), 2);
    assert_eq!(doc["edges"][0]["label"], "b1!");

    let text = run(&["lts", &corpus("two-sends.abc"), "--format", "text"]);
    assert!(stdout(&text).contains("0 -b1!-> 1"));

    let bounded = run(&["lts", &fixture("fork-bomb.abc"), "--max-states", "20"]);
    assert_eq!(bounded.status.code(), Some(2));
}

#[test]
fn derivations_lists_proofs_and_tables() {
    let out = run(&["derivations", &corpus("two-taus.abc"), "--tables"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.matches("tau  ->").count(), 2, "{text}");
    assert!(text.contains("concurrency"));
    assert!(text.contains("<c>A | <'c>B"), "sync abstract class listed: {text}");

    let bad_state = run(&["derivations", &corpus("two-taus.abc"), "--state", "99"]);
    assert_eq!(bad_state.status.code(), Some(3));
}

#[test]
fn conc_resolves_derivations_by_index_and_name() {
    let yes = run(&["conc", &corpus("two-taus.abc"), "#0", "#2"]);
    assert_eq!(yes.status.code(), Some(0));
    assert!(stdout(&yes).contains("concurrent: true"));

    let no = run(&["conc", &corpus("two-taus.abc"), "#0", "#4"]);
    assert_eq!(no.status.code(), Some(1));
    assert!(stdout(&no).contains("concurrent: false"));

    let named = run(&["conc", &corpus("two-taus.abc"), "A:<c>A | B", "#2"]);
    assert_eq!(named.status.code(), Some(0));

    let unknown = run(&["conc", &corpus("two-taus.abc"), "#0", "nonsense"]);
    assert_eq!(unknown.status.code(), Some(3));
}

#[test]
fn just_follows_the_verdict_and_explains_it() {
    let just = run(&["just", &corpus("loop-or-send.abc"), "0 ; 0 -c-> 0"]);
    assert_eq!(just.status.code(), Some(0));
    assert!(stdout(&just).contains("just"));

    let unjust = run(&["just", &corpus("idle-sender.abc"), "0 ; 0 -c-> 0"]);
    assert_eq!(unjust.status.code(), Some(1));
    assert!(stdout(&unjust).contains("unjust"));

    let doc = run(&[
        "just",
        &corpus("idle-sender.abc"),
        "0 ; 0 -c-> 0",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&doc)).expect("valid json");
    assert_eq!(doc["just"], false);
    assert_eq!(doc["agreed"], true);
    assert_eq!(doc["methods"].as_array().expect("two methods").len(), 2);

    let bad_literal = run(&["just", &corpus("loop-or-send.abc"), "0 ; 0 -q-> 0"]);
    assert_eq!(bad_literal.status.code(), Some(3));
}

#[test]
fn lassos_enumerates_complete_paths() {
    let out = run(&[
        "lassos",
        &corpus("loop-or-send.abc"),
        "--stem",
        "2",
        "--cycle",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("3 complete lassos"), "{text}");

    let with_finite = run(&[
        "lassos",
        &corpus("loop-or-send.abc"),
        "--stem",
        "2",
        "--cycle",
        "2",
        "--finlen",
        "3",
        "--finite",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&stdout(&with_finite)).expect("valid json");
    let items = doc.as_array().expect("array");
    assert_eq!(items.len(), 6);
    assert!(items.iter().any(|i| i["kind"] == "finite"));
    assert!(items.iter().any(|i| i["kind"] == "lasso"));
}

#[test]
fn bisim_compares_expressions_against_the_spec_alphabet() {
    let same = run(&["bisim", &corpus("two-taus.abc"), "b!.0 | A", "A | b!.0"]);
    assert_eq!(same.status.code(), Some(0));
    assert!(stdout(&same).contains("bisimilar: true"));

    let different = run(&["bisim", &corpus("two-taus.abc"), "tau.0", "0"]);
    assert_eq!(different.status.code(), Some(1));
    assert!(stdout(&different).contains("bisimilar: false"));

    let unparseable = run(&["bisim", &corpus("two-taus.abc"), "a.(", "0"]);
    assert_eq!(unparseable.status.code(), Some(3));
}

#[test]
fn parse_echoes_a_normalized_spec() {
    let out = run(&["parse", &corpus("two-taus.abc")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("agent A = c.A"));
    assert!(text.contains("init A | B"));
}

#[test]
fn demo_scheduler_reports_three_passes() {
    let out = run(&["demo-scheduler"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.matches("PASS").count(), 3, "{text}");
    assert_eq!(text.matches("FAIL").count(), 0, "{text}");
}
