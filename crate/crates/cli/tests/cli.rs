//! End-to-end checks of the `fraceig` binary: exit codes, output files,
//! and byte-level determinism of report.json across reruns and thread
//! counts.

use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

static STAMP: AtomicU64 = AtomicU64::new(0);

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fraceig"))
}

fn scratch(name: &str) -> PathBuf {
    let stamp = STAMP.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!(
        "fraceig-test-{}-{name}-{stamp}",
        std::process::id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &std::path::Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn list_experiments_names_all_runners() {
    let out = bin().arg("list-experiments").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for tag in [
        "thm11",
        "cor11",
        "barta",
        "thm12",
        "thm13",
        "faber_krahn",
        "chiti",
        "obstacle",
        "mc_crosscheck",
    ] {
        assert!(text.contains(tag), "missing {tag} in:\n{text}");
    }
}

#[test]
fn validate_echoes_normalized_config() {
    let dir = scratch("validate");
    let cfg = write_config(&dir, r#"{"experiment":"thm11","alpha":1.0,"family":"ellipses"}"#);
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["experiment"], "thm11");
    assert_eq!(v["h"], 1.0 / 64.0);
    assert_eq!(v["seed"], 42);
}

#[test]
fn bad_configs_exit_with_code_two() {
    let dir = scratch("bad");
    for text in [
        r#"{"experiment":"thm99"}"#,
        r#"{"experiment":"thm11","alpha":-1}"#,
        r#"{"experiment":"thm11","surprise":3}"#,
        "not json",
    ] {
        let cfg = write_config(&dir, text);
        let out = bin().arg("run").arg(&cfg).arg("--out").arg(dir.join("o")).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "config {text:?}");
    }
}

#[test]
fn run_writes_reports_and_exits_zero() {
    let dir = scratch("run");
    let cfg = write_config(
        &dir,
        r#"{"experiment":"barta","alpha":1.0,"h":0.125,"domain":
            {"kind":"ball","d":2,"h":0.125,"bbox":{"lo":[-1,-1],"hi":[1,1]},
             "params":{"center":[0.0,0.0],"radius":1.0}}}"#,
    );
    let out_dir = dir.join("out");
    let out = bin().arg("run").arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "holds");
    assert!(out_dir.join("rows.csv").exists());
    assert!(out_dir.join("metadata.json").exists());
}

#[test]
fn reports_are_byte_identical_across_reruns_and_thread_counts() {
    let dir = scratch("determinism");
    let cfg = write_config(
        &dir,
        r#"{"experiment":"mc_crosscheck","alpha":1.0,"h":0.125,"n":400,"dt":0.005,"seed":3}"#,
    );
    let mut outputs = Vec::new();
    for (tag, threads) in [("a", "1"), ("b", "2"), ("c", "1")] {
        let out_dir = dir.join(tag);
        let out = bin()
            .arg("run")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .arg("--threads")
            .arg(threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(out_dir.join("report.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "thread count changed the report");
    assert_eq!(outputs[0], outputs[2], "rerun changed the report");
}

#[test]
fn export_operator_writes_matrix_market() {
    let dir = scratch("export");
    let cfg = write_config(
        &dir,
        r#"{"experiment":"barta","alpha":1.5,"h":0.25,"domain":
            {"kind":"rectangle","d":2,"h":0.25,"bbox":{"lo":[0,0],"hi":[1,1]},
             "params":{"lo":[0.0,0.0],"hi":[1.0,1.0]}}}"#,
    );
    let out_dir = dir.join("out");
    let out = bin().arg("export-operator").arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(out_dir.join("operator.mtx")).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
    // Header: rows cols nnz, then that many entries.
    let header: Vec<usize> = text
        .lines()
        .find(|l| !l.starts_with('%'))
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    let entries = text.lines().filter(|l| !l.starts_with('%')).count() - 1;
    assert_eq!(header[2], entries);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = scratch("seed");
    let cfg = write_config(
        &dir,
        r#"{"experiment":"mc_crosscheck","alpha":1.0,"h":0.125,"n":300,"dt":0.005,"seed":3}"#,
    );
    let run = |tag: &str, seed: Option<&str>| {
        let out_dir = dir.join(tag);
        let mut c = bin();
        c.arg("run").arg(&cfg).arg("--out").arg(&out_dir);
        if let Some(s) = seed {
            c.arg("--seed").arg(s);
        }
        let out = c.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(out_dir.join("report.json")).unwrap()
    };
    let base = run("base", None);
    let same = run("same", Some("3"));
    let diff = run("diff", Some("4"));
    assert_eq!(base, same);
    assert_ne!(base, diff);
}

#[test]
fn threads_env_var_is_honored() {
    let dir = scratch("env");
    let cfg = write_config(
        &dir,
        r#"{"experiment":"mc_crosscheck","alpha":1.0,"h":0.125,"n":300,"dt":0.005,"seed":5}"#,
    );
    let out_dir = dir.join("out");
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .env("FRACEIG_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // Same run with an explicit flag must agree byte for byte.
    let out_dir2 = dir.join("out2");
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir2)
        .arg("--threads")
        .arg("2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(out_dir.join("report.json")).unwrap(),
        std::fs::read(out_dir2.join("report.json")).unwrap()
    );
}
