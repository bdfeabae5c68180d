use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_propdamage"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("one error line");
    serde_json::from_str(line).expect("machine-readable error")
}

#[test]
fn help_lists_every_subcommand() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in [
        "synth", "ingest", "features", "augment", "split", "train", "eval", "infer", "importance", "bandstudy", "ablate",
        "loo",
    ] {
        assert!(text.contains(sub), "{sub} missing from --help");
    }
    let train = bin().args(["features", "--help"]).output().unwrap();
    assert!(String::from_utf8_lossy(&train.stdout).contains("default 5"));
}

#[test]
fn exit_codes_and_error_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = run_in(tmp.path(), &["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert_eq!(stderr_json(&unknown)["error"], "usage");

    let cfg = run_in(tmp.path(), &["--config", "missing.toml", "train"]);
    assert_eq!(cfg.status.code(), Some(3));
    assert_eq!(stderr_json(&cfg)["code"], 3);

    std::fs::write(tmp.path().join("bad.toml"), "[features]\nwindow = 100\n").unwrap();
    assert_eq!(run_in(tmp.path(), &["--config", "bad.toml", "features"]).status.code(), Some(3));
    assert_eq!(run_in(tmp.path(), &["features", "--bw", "9"]).status.code(), Some(3));

    let data = run_in(tmp.path(), &["train", "--corpus", "nowhere"]);
    assert_eq!(data.status.code(), Some(4));
    assert_eq!(stderr_json(&data)["error"], "data");

    std::fs::create_dir(tmp.path().join("c")).unwrap();
    std::fs::write(tmp.path().join("c/x.csv"), "t,acc_x\n0,1\n").unwrap();
    std::fs::write(
        tmp.path().join("c/x.meta.json"),
        r#"{"flight_id":"x","kind":"healthy","sample_rate_hz":222.0}"#,
    )
    .unwrap();
    assert_eq!(run_in(tmp.path(), &["features", "--corpus", "c"]).status.code(), Some(4));
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn small_pipeline_is_rerunnable() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let ok = |args: &[&str]| {
        let out = run_in(d, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    };
    ok(&["--seed", "3", "synth", "--scale", "0.05", "--corpus", "c"]);
    let n_csv = std::fs::read_dir(d.join("c"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(n_csv, 18 * 4);
    let snapshot = files_under(&d.join("c"));

    ok(&["features", "--bw", "7", "--corpus", "c", "--out", "o1"]);
    let text = std::fs::read_to_string(d.join("o1/features.csv")).unwrap();
    assert!(text.starts_with("# propdamage"));
    let header = text.lines().nth(1).unwrap();
    assert_eq!(header.split(',').count(), 6 + 172);

    for out in ["o1", "o2"] {
        ok(&["--seed", "3", "train", "--corpus", "c", "--out", out]);
        ok(&["--seed", "3", "eval", "--corpus", "c", "--out", out]);
    }
    let a = files_under(&d.join("o1/model"));
    assert_eq!(a, files_under(&d.join("o2/model")));
    assert_eq!(
        std::fs::read(d.join("o1/reports/eval/metrics.csv")).unwrap(),
        std::fs::read(d.join("o2/reports/eval/metrics.csv")).unwrap()
    );
    let index = String::from_utf8(a.iter().find(|f| f.0 == "cascade.json").unwrap().1.clone()).unwrap();
    assert!(index.contains("\"config_hash\""));

    let json = ok(&["--json", "split", "--corpus", "c", "--out", "o1"]);
    let report: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(report["command"], "split");
    assert!(report["summary"]["train"].as_u64().unwrap() > 0);

    // inputs stay untouched
    assert_eq!(snapshot, files_under(&d.join("c")));
}

#[test]
fn infer_counts_windows_of_a_two_minute_log() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let ok = |args: &[&str]| {
        let out = run_in(d, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    };
    ok(&["synth", "--scale", "0.05", "--corpus", "c"]);
    ok(&["train", "--corpus", "c", "--out", "o"]);
    ok(&["synth", "--duration", "120", "--no-augment", "--corpus", "long"]);
    // a log without sidecar is still accepted
    std::fs::copy(d.join("long/healthy.csv"), d.join("flight.csv")).unwrap();
    let out = ok(&["--json", "infer", "--log", "flight.csv", "--out", "o"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["summary"]["windows"], 826);
    let diag = std::fs::read_to_string(d.join("o/diagnosis/flight.csv")).unwrap();
    assert_eq!(diag.lines().filter(|l| !l.starts_with('#')).count(), 1 + 826);
}

#[test]
fn ingest_and_augment_leave_inputs_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let ok = |args: &[&str]| {
        let out = run_in(d, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    ok(&["synth", "--duration", "5", "--no-augment", "--corpus", "raw"]);
    let before = files_under(&d.join("raw"));
    ok(&["ingest", "--input", "raw", "--corpus", "c", "--out", "o"]);
    ok(&["augment", "--input", "raw", "--output", "aug", "--out", "o"]);
    assert_eq!(before, files_under(&d.join("raw")));
    assert_eq!(files_under(&d.join("aug")).len(), 18 * 4 * 2);
    assert!(d.join("aug/tip-20-20-m1.rot3.meta.json").exists());
    assert_eq!(run_in(d, &["ingest", "--input", "raw", "--corpus", "raw"]).status.code(), Some(4));
}
