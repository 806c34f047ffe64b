use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
        .iter()
        .collect();
    p.display().to_string()
}

fn bphz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bphz"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn degree_reports_both_routes() {
    let out = bphz(&["degree", &fixture("sunset.json")]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["uv_degree"], 2);
    assert_eq!(v["uv_degree_from_monomials"], 2);
    assert_eq!(v["status"], "renormalization part");
}

#[test]
fn forests_counts_nest() {
    let out = bphz(&["forests", &fixture("nest.json")]);
    assert_eq!(json(&out)["count"], 4);
}

#[test]
fn zi_check_succeeds_on_nest() {
    let out = bphz(&[
        "zi-check",
        &fixture("nest.json"),
        "--a",
        "deg+2-on-V0",
        "--b",
        "minimal",
        "--n",
        "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn join_check_succeeds_on_join2() {
    let out = bphz(&["join-check", &fixture("join2.json"), "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn assignment_file_is_accepted() {
    let out = bphz(&[
        "zi-check",
        &fixture("raise_delta.json"),
        "--a",
        "minimal",
        "--b",
        &fixture("assignments/raise_delta_low.json"),
        "--n",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn input_errors_exit_with_two() {
    let missing = bphz(&["degree", "/nonexistent/graph.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
    let not_wave = bphz(&[
        "fuse",
        &fixture("wave_fish.json"),
        "--vertex",
        "b",
        "--slot",
        "0",
    ]);
    assert_eq!(not_wave.status.code(), Some(2));
    let no_limit = bphz(&["join-check", &fixture("nest.json")]);
    assert_eq!(no_limit.status.code(), Some(2));
}

#[test]
fn fused_report_carries_the_ledger() {
    let out = bphz(&[
        "fuse",
        &fixture("wave_pair.json"),
        "--vertex",
        "p",
        "--slot",
        "2",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    let text = v.to_string();
    assert!(
        text.contains("fused_delta") && text.contains("fused_dimension"),
        "{text}"
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec![
            "eval",
            &fixture("nest.json") as &str,
            "--seed",
            "5",
            "--n",
            "2",
        ],
        vec!["probe", &fixture("raise.json") as &str, "--seed", "2"],
    ] {
        let a = bphz(&args);
        let b = bphz(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn seeds_change_the_sampled_configurations() {
    let a = bphz(&["eval", &fixture("nest.json"), "--seed", "1", "--n", "1"]);
    let b = bphz(&["eval", &fixture("nest.json"), "--seed", "2", "--n", "1"]);
    assert_ne!(a.stdout, b.stdout);
}
