use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn redund(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redund"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_detect_verify() {
    let dir = tempfile::tempdir().unwrap();
    let gen = redund(&["gen", "a1", "3"]);
    assert!(gen.status.success());
    let sys = write(dir.path(), "a1.txt", &stdout(&gen));
    for method in ["naive", "combinatorial", "strong"] {
        let res = dir.path().join(format!("{method}.json"));
        let res = res.to_str().unwrap();
        let out = redund(&[
            "detect",
            &sys,
            "--method",
            method,
            "--certificates",
            "-o",
            res,
        ]);
        assert_eq!(out.status.code(), Some(0), "{method}");
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(res).unwrap()).unwrap();
        assert_eq!(doc["redundant"], serde_json::json!([1, 2, 3]));
        assert_eq!(doc["nonredundant"], serde_json::json!([4, 5, 6, 7]));
        let v = redund(&["verify", res, &sys]);
        assert_eq!(
            v.status.code(),
            Some(0),
            "{method}: {}",
            String::from_utf8_lossy(&v.stderr)
        );
    }
}

#[test]
fn detect_prints_stats_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(
        dir.path(),
        "a3.txt",
        &stdout(&redund(&["gen", "a3", "3", "2"])),
    );
    let out = redund(&["detect", &sys, "--stats", "--parallel", "--seed", "5"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["stats"]["subset_tests"].as_u64().is_some());
    assert_eq!(doc["method"], "combinatorial");
}

#[test]
fn clarkson_without_certificates_is_rejected_by_verify() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(
        dir.path(),
        "r.txt",
        &stdout(&redund(&["gen", "random", "4", "2", "--seed", "3"])),
    );
    let out = redund(&["detect", &sys, "--method", "clarkson"]);
    assert!(out.status.success());
    let res = write(dir.path(), "r.json", &stdout(&out));
    assert_eq!(redund(&["verify", &res, &sys]).status.code(), Some(4));
}

#[test]
fn tampered_result_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(dir.path(), "a2.txt", &stdout(&redund(&["gen", "a2", "2"])));
    let out = redund(&["detect", &sys, "--certificates"]);
    let doc = stdout(&out).replacen("\"+", "\"-", 1);
    let res = write(dir.path(), "bad.json", &doc);
    assert_eq!(redund(&["verify", &res, &sys]).status.code(), Some(4));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let infeasible = write(dir.path(), "inf.txt", "1 1\n-1 1\n");
    let flat = write(dir.path(), "flat.txt", "1 1\n0 1\n");
    let bad = write(dir.path(), "bad.txt", "2 1\n1 1\n");
    assert_eq!(redund(&["detect", &infeasible]).status.code(), Some(1));
    assert_eq!(redund(&["detect", &flat]).status.code(), Some(3));
    assert_eq!(
        redund(&["detect", &flat, "--method", "clarkson"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        redund(&["detect", &flat, "--method", "strong"])
            .status
            .code(),
        Some(0)
    );
    let err = redund(&["detect", &bad]);
    assert_eq!(err.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&err.stderr).contains("line 2"));
    assert_eq!(
        redund(&["detect", "/nonexistent/file"]).status.code(),
        Some(2)
    );
    assert_eq!(redund(&["gen", "a1", "0"]).status.code(), Some(2));
}

#[test]
fn hrep_input() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        "H-representation\nbegin\n5 3 rational\n0 1 0\n0 0 1\n1 -1 0\n1 0 -1\n3 -1 -1\nend\n";
    let sys = write(dir.path(), "square.ine", text);
    let out = redund(&["detect", &sys, "--certificates"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["redundant"], serde_json::json!([5]));
    let res = write(dir.path(), "square.json", &stdout(&out));
    assert!(redund(&["verify", &res, &sys]).status.success());
}
