//! End-to-end runs of the `explore` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

fn explore(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_explore"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = explore(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Relative path to file bytes for every file under `dir`.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn commands_rerun_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    let runs: Vec<Vec<String>> = vec![
        vec![
            "gen-worlds",
            "--count",
            "2",
            "--target-area",
            "60",
            "--seed",
            "5",
            "--out",
            &p("worlds"),
        ],
        vec![
            "explore",
            "--world",
            &p("worlds/world_000.txt"),
            "--policy",
            "frontier",
            "--steps",
            "250",
            "--eta",
            "0.05",
            "--seed",
            "3",
            "--out",
            &p("ep"),
        ],
        vec![
            "eval-coverage",
            "--worlds",
            &p("worlds"),
            "--policy",
            "frontier,random",
            "--steps",
            "80",
            "--replicates",
            "2",
            "--starts",
            "2",
            "--jobs",
            "2",
            "--seed",
            "1",
            "--out",
            &p("cov"),
        ],
        vec![
            "eval-downstream",
            "--world",
            &p("worlds/world_001.txt"),
            "--steps",
            "150",
            "--goals",
            "3",
            "--seed",
            "2",
            "--out",
            &p("down"),
        ],
    ]
    .into_iter()
    .map(|r| r.into_iter().map(String::from).collect())
    .collect();
    let mut first = Vec::new();
    for run in &runs {
        let args: Vec<&str> = run.iter().map(String::as_str).collect();
        ok(&args);
        let out = root.join(args.last().unwrap());
        first.push(snapshot(&out));
        if args[0] != "gen-worlds" {
            fs::remove_dir_all(&out).unwrap();
            ok(&args);
            assert_eq!(
                snapshot(&out),
                *first.last().unwrap(),
                "{} output changed on rerun",
                args[0]
            );
        }
    }
    let ep = &first[1];
    assert_eq!(ep.keys().filter(|k| k.ends_with(".pgm")).count(), 2);
    let trace = String::from_utf8(ep["trace.jsonl"].clone()).unwrap();
    assert_eq!(trace.lines().count(), 251);
    assert_eq!(
        first[2].keys().filter(|k| k.ends_with(".jsonl")).count(),
        16
    );
    let summary: serde_json::Value = serde_json::from_slice(&first[3]["summary.json"]).unwrap();
    assert!(summary["spl_with_log"].is_f64() && summary["spl_no_map"].is_f64());

    // the saved config alone reproduces a run
    fs::copy(root.join("ep/config.json"), root.join("ep.json")).unwrap();
    fs::remove_dir_all(root.join("ep")).unwrap();
    ok(&["explore", "--config", &p("ep.json")]);
    assert_eq!(snapshot(&root.join("ep")), first[1]);

    // curves rebuilt from saved traces match the original CSV
    ok(&[
        "eval-coverage",
        "--from-traces",
        &p("cov/traces"),
        "--out",
        &p("rebuilt"),
    ]);
    assert_eq!(
        fs::read(root.join("rebuilt/curves.csv")).unwrap(),
        first[2]["curves.csv"]
    );
}

#[test]
fn failures_emit_a_json_error_record() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.txt");
    let out = explore(&[
        "explore",
        "--world",
        &missing.to_string_lossy(),
        "--out",
        &tmp.path().to_string_lossy(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["kind"], "world");
    assert!(record["error"]["message"]
        .as_str()
        .unwrap()
        .contains("missing.txt"));

    let out = explore(&[
        "explore",
        "--world",
        &missing.to_string_lossy(),
        "--policy",
        "teleport",
    ]);
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["kind"], "config");
    assert!(!out.status.success());
}
