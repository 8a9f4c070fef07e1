use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cufraisse")).args(args).output().expect("binary runs")
}

fn run_manifest(dir: &Path, name: &str, text: &str, out: &str) -> Output {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    run(&["--manifest", path.to_str().unwrap(), "--out", dir.join(out).to_str().unwrap()])
}

fn digest(path: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(path).unwrap()).to_vec()
}

fn sidecar(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const FRAISSE: &str = "command fraisse\ncategory e_inf\nsteps 10\ndepth 2\nbound 4\ncertificates 3\nseed 7\n";

#[test]
fn same_manifest_same_bytes() {
    let t = TempDir::new().unwrap();
    let a = run_manifest(t.path(), "m.txt", FRAISSE, "a");
    let b = run_manifest(t.path(), "m.txt", FRAISSE, "b");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    for f in ["report.txt", "report.json", "archive.json"] {
        assert_eq!(digest(&t.path().join("a").join(f)), digest(&t.path().join("b").join(f)), "{f}");
    }
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_flag_overrides_manifest() {
    let t = TempDir::new().unwrap();
    run_manifest(t.path(), "m.txt", FRAISSE, "a");
    let path = t.path().join("m.txt");
    let out = t.path().join("b");
    let o = run(&["--manifest", path.to_str().unwrap(), "--seed", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(digest(&t.path().join("a/report.txt")), digest(&out.join("report.txt")));
}

#[test]
fn fraisse_archive_replays() {
    let t = TempDir::new().unwrap();
    assert_eq!(run_manifest(t.path(), "m.txt", FRAISSE, "a").status.code(), Some(0));
    let archive = t.path().join("a/archive.json");
    let out = t.path().join("r");
    let o = run(&["--replay", archive.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let s = sidecar(&out);
    assert_eq!(s["verdict"], "pass");
    assert_eq!(s["data"]["replay"]["certificates"], 3);
    assert_eq!(s["data"]["replay"]["bit_exact"], true);
}

#[test]
fn tampered_archive_fails() {
    let t = TempDir::new().unwrap();
    run_manifest(t.path(), "m.txt", FRAISSE, "a");
    let mut a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(t.path().join("a/archive.json")).unwrap()).unwrap();
    a["certificates"][0]["forward"] = false.into();
    let tampered = t.path().join("t.json");
    std::fs::write(&tampered, a.to_string()).unwrap();
    let out = t.path().join("r");
    let o = run(&["--replay", tampered.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let s = sidecar(&out);
    assert_eq!(s["verdict"], "fail");
    assert_eq!(s["data"]["replay"]["failed"], serde_json::json!([0]));
}

#[test]
fn obstruction_is_certified() {
    let t = TempDir::new().unwrap();
    let m = "command amalgamate\ncategory e_emb\nmap elem 1 6 4\nmap elem 1 6 5\nbound 60\n";
    let o = run_manifest(t.path(), "m.txt", m, "a");
    assert_eq!(o.status.code(), Some(0));
    let s = sidecar(&t.path().join("a"));
    assert_eq!(s["data"]["exhausted"]["bound"], 60);
    assert_eq!(s["data"]["interval_certificate"]["disjoint"], true);
    assert!(String::from_utf8_lossy(&o.stdout).contains("no amalgamation exists"));
}

#[test]
fn exhausted_search_without_certificate() {
    // the interval certificate only covers maps out of E_1
    let t = TempDir::new().unwrap();
    let m = "command amalgamate\ncategory e_emb\nmap elem 2 4 2\nmap elem 2 5 2\nbound 3\n";
    let o = run_manifest(t.path(), "m.txt", m, "a");
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(sidecar(&t.path().join("a"))["verdict"], "exhausted");
}

#[test]
fn amalgam_found() {
    let t = TempDir::new().unwrap();
    let m = "command amalgamate\ncategory e_inf\nmap elem 1 2 1\nmap elem 1 3 2\n";
    let o = run_manifest(t.path(), "m.txt", m, "a");
    assert_eq!(o.status.code(), Some(0));
    assert!(sidecar(&t.path().join("a"))["data"]["amalgam"].is_object());
}

#[test]
fn shift_table_rows() {
    let t = TempDir::new().unwrap();
    let o = run_manifest(t.path(), "m.txt", "command metric\ntable shift 4 16\n", "a");
    assert_eq!(o.status.code(), Some(0));
    let rows = sidecar(&t.path().join("a"))["data"]["shift_table"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r["diagonal"], "1/2");
    }
    // over lambda_2..lambda_16 the n = 2 shift sits at 1/2 + 14/60
    assert_eq!(rows[0]["d_lambda"], "11/15");
}

#[test]
fn check_reports_axioms() {
    let t = TempDir::new().unwrap();
    let m = "command check\nsemigroup E 3\nsemigroup Nbar\nmap elem 2 4 3\ndepth 2\n";
    let o = run_manifest(t.path(), "m.txt", m, "a");
    assert_eq!(o.status.code(), Some(0));
    let s = sidecar(&t.path().join("a"));
    assert_eq!(s["data"]["axioms"].as_array().unwrap().len(), 2);
}

#[test]
fn non_morphism_fails_check() {
    let t = TempDir::new().unwrap();
    // 1 + 2 = inf in E_2 but 1 + 2 = 3 in E_5
    let o = run_manifest(t.path(), "m.txt", "command check\nmap elem 2 5 1\n", "a");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn enumerate_counts() {
    let t = TempDir::new().unwrap();
    let o = run_manifest(t.path(), "m.txt", "command enumerate\nhoms 3 3 morphisms\n", "a");
    assert_eq!(o.status.code(), Some(0));
    let s = sidecar(&t.path().join("a"));
    assert_eq!(s["data"]["enumerations"][0]["maps"].as_array().unwrap().len(), 5);
}

#[test]
fn parse_error_has_position() {
    let t = TempDir::new().unwrap();
    let o = run_manifest(t.path(), "m.txt", "command check\nsemigroup E x\n", "a");
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2, column 13"), "{err}");
    assert!(!t.path().join("a").exists());
}

#[test]
fn bad_flags_and_env() {
    assert_eq!(run(&["--bogus"]).status.code(), Some(3));
    assert_eq!(run(&[]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let t = TempDir::new().unwrap();
    let path = t.path().join("m.txt");
    std::fs::write(&path, "command enumerate\nhoms 1 2 embeddings\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cufraisse"))
        .args(["--manifest", path.to_str().unwrap(), "--out", t.path().join("a").to_str().unwrap()])
        .env("CUFRAISSE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}
