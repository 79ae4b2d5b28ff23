mod common;

use common::corpus_path;
use khovacable::cli::{resolve_cap, run_with_env, EXIT_CAP, EXIT_IDENTITY, EXIT_INPUT, EXIT_OK};

fn run(args: &[&str]) -> khovacable::cli::Outcome {
    let mut v = vec!["khovacable"];
    v.extend_from_slice(args);
    run_with_env(v, None)
}

#[test]
fn jones_table() {
    let out = run(&["jones", &corpus_path("unknot-0"), "--table"]);
    assert_eq!(out.code, EXIT_OK);
    assert_eq!(out.stdout, "q + q^-1\n");
}

#[test]
fn jones_json_is_deterministic() {
    let a = run(&["jones", &corpus_path("trefoil-r")]);
    let b = run(&["jones", &corpus_path("trefoil-r")]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(v["writhe"], 3);
    assert_eq!(v["jones"]["text"], "-q^9 + q^5 + q^3 + q");
}

#[test]
fn colored_jones_unknot() {
    let out = run(&["colored-jones", &corpus_path("unknot-0"), "--colors", "2", "--table"]);
    assert_eq!(out.stdout, "q^2 + 1 + q^-2\n");
}

#[test]
fn bicomplex_verify_trefoil() {
    let out = run(&["bicomplex-verify", &corpus_path("trefoil-r"), "--colors", "2", "--table"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.starts_with("d'2=ok d''2=ok anticommute=ok euler=ok"));
    let out = run(&["bicomplex-verify", &corpus_path("unknot-kink-"), "--colors", "2"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["anticommute"]["status"], "ok");
    assert_eq!(v["parity"][0]["even"], true);
}

#[test]
fn identity_failure_exit_code() {
    // an edge whose contracted strands cross a kept strand cannot be closed off
    let out = run(&["bicomplex-verify", &corpus_path("hopf"), "--colors", "2,1"]);
    assert_eq!(out.code, EXIT_IDENTITY);
    assert!(out.stderr.contains("convention error"), "{}", out.stderr);
}

#[test]
fn input_errors() {
    assert_eq!(run(&["jones", "/nonexistent.json"]).code, EXIT_INPUT);
    assert_eq!(run(&["frobnicate"]).code, EXIT_INPUT);
    assert_eq!(run(&["colored-jones", &corpus_path("hopf"), "--colors", "2"]).code, EXIT_INPUT);
    assert_eq!(run(&["colored-jones", &corpus_path("hopf"), "--colors", "0,1"]).code, EXIT_INPUT);
}

#[test]
fn cap_exceeded() {
    let out = run(&["khovanov", &corpus_path("trefoil-r"), "--cap", "4"]);
    assert_eq!(out.code, EXIT_CAP);
    let out = run_with_env(["khovacable", "jones", &corpus_path("trefoil-r")], Some("4"));
    assert_eq!(out.code, EXIT_CAP);
    assert_eq!(resolve_cap(Some(9), Some("4")), Ok(9));
    assert!(resolve_cap(None, Some("x")).is_err());
}

#[test]
fn khovanov_table_and_pairings() {
    let out = run(&["khovanov", &corpus_path("trefoil-r"), "--table"]);
    assert!(out.stdout.contains("   3    7  Z/2\n"), "{}", out.stdout);
    let out = run(&["pairings", "--colors", "3,2"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["ranks"], serde_json::json!([1, 3, 2]));
    let out = run(&["cable", &corpus_path("trefoil-r"), "--colors", "2"]);
    assert_eq!(out.code, EXIT_OK);
    assert_eq!(khovacable::diagram::parse_diagram(&out.stdout).unwrap().crossing_count(), 12);
}

#[test]
fn total_homology_unknot() {
    let out = run(&["total-homology", &corpus_path("unknot-0"), "--colors", "2"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(!v["total_homology"].as_array().unwrap().is_empty());
}
