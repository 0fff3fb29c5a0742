//! End-to-end tests of the platefind binary: the gen/process/query/report
//! walk, boundary normalization, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn platefind(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_platefind"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_process_query_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = platefind(
        &["gen", "--plates", "2", "--seed", "7", "--out", "corpus", "--tier", "mild"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("2 scenes"));

    // Process both generated scenes into one store.
    let out = platefind(
        &[
            "process",
            "--manifest",
            "corpus/mild/scene_000/manifest.json",
            "--manifest",
            "corpus/mild/scene_001/manifest.json",
            "--store",
            "store.jsonl",
            "--trace",
            "trace.jsonl",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("store.jsonl").exists());

    // The trace proves the transform sweep ran.
    let trace = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert!(first["winning_variant"]["rotation_deg"].is_number());

    // Query each scene's truth plate; expect at least one hit for one of
    // them (both, in practice; the acceptance suite quantifies this).
    let truth: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("corpus/mild/scene_000/truth.json")).unwrap(),
    )
    .unwrap();
    let plate = truth["plate_text"].as_str().unwrap();
    let out = platefind(
        &["query", "--plate", plate, "--store", "store.jsonl"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("match(es)"), "{text}");
    assert!(text.contains("plate,timestamp_s,camera_id"), "{text}");

    // Report writes the same rows to a CSV file.
    let out = platefind(
        &[
            "report",
            "--store",
            "store.jsonl",
            "--plate",
            plate,
            "--out",
            "report.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("plate,timestamp_s,camera_id,video_id,frame_index,distance"));
}

#[test]
fn query_normalizes_plate_at_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("store.jsonl"), b"").unwrap();
    let out = platefind(
        &["query", "--plate", "ts 09 ub 8902", "--store", "store.jsonl"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("for TS09UB8902"));
}

#[test]
fn unknown_subcommand_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = platefind(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_plate_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("store.jsonl"), b"").unwrap();
    let out = platefind(
        &["query", "--plate", "TS#09", "--store", "store.jsonl"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn unknown_tier_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = platefind(
        &["gen", "--plates", "1", "--out", "c", "--tier", "extreme"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_store_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = platefind(
        &["query", "--plate", "TS09UB8902", "--store", "absent.jsonl"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupt_store_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("store.jsonl"), b"{broken\n").unwrap();
    let out = platefind(
        &["query", "--plate", "TS09UB8902", "--store", "store.jsonl"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let out = platefind(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}
