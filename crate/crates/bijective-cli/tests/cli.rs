//! End-to-end checks of the command line surface: file formats, exit codes,
//! machine-readable errors, and byte-identical reruns.

use std::process::{Command, Output};

fn bijective(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bijective"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn profile_csv_matches_expected_ranks() {
    let out = bijective(&[
        "profile",
        "--alg",
        "kcenter",
        "--metric",
        "path:5:1/4",
        "--k",
        "2",
        "--n",
        "1",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        stdout,
        "rank,cost_num,cost_den\n0,0,1\n1,0,1\n2,1,2\n3,1,2\n4,1,2\n"
    );
}

#[test]
fn compare_report_is_byte_identical_across_reruns() {
    let args = [
        "compare", "--metric", "cycle:6", "--k", "2", "--n", "3", "--a", "greedy", "--b", "opt",
        "--rho", "2,4/3",
    ];
    let first = bijective(&args);
    let second = bijective(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("\"strict_rho\""), "{text}");
    assert!(text.contains("\"dominance\""));
}

#[test]
fn budget_refusal_is_machine_readable_and_nonzero() {
    let out = bijective(&[
        "profile", "--alg", "greedy", "--metric", "path:10", "--k", "2", "--n", "12",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(err["kind"], "budget_exceeded");
}

#[test]
fn verify_suite_exit_codes() {
    let out = bijective(&["verify", "--suite", "lower-bound"]);
    assert!(out.status.success());
    let out = bijective(&["verify", "--suite", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_reports_dominance_on_the_small_cycle() {
    let out = bijective(&[
        "oracle", "--metric", "path:3", "--k", "2", "--c0", "0,2", "--n", "2",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().trim()).unwrap();
    assert_eq!(v["tree_count"], 16);
    assert_eq!(v["dominant"], true);
}

#[test]
fn trace_csv_shape() {
    let out = bijective(&[
        "trace", "--metric", "cycle:6", "--c0", "0,3", "--alg", "greedy", "--seq", "1,4,2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "seq_id,step,request,server,cost");
    assert_eq!(lines.next().unwrap(), "0,0,1,0,1");
    assert!(text.trim_end().ends_with("total=3"));
}

#[test]
fn adversary_three_point_output() {
    let out = bijective(&["adversary", "--kind", "three-point", "--n", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("sequence=0,2,0,1,"), "{text}");
    assert!(text.contains("opt=1"), "{text}");
}
