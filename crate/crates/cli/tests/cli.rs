use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qprove(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qprove"))
        .args(args)
        .env_remove("QPROVE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_matrix(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_prop6_prints_one_line_per_parameter() {
    let o = qprove(&["verify", "prop6", "--max", "25"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("verified prop6 ")).count(), 26);
    assert!(out.lines().all(|l| !l.starts_with("failed")));
}

#[test]
fn every_proved_identity_passes_at_small_sizes() {
    for (name, max) in [
        ("conjecture1", "3"),
        ("theorem2", "3"),
        ("eq8gen-equivalence", "3"),
        ("theorem3", "2"),
        ("qbinomial-theorem", "10"),
        ("conj-1d", "5"),
        ("corollary-coefficient", "10"),
        ("cor1a-truncated", "4"),
        ("eq21", "3"),
        ("touchard", "5"),
    ] {
        assert_eq!(qprove(&["verify", name, "--max", max]).status.code(), Some(0), "{name}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_matrix(dir.path(), "bad.txt", "5 2\n1 0\n0\n");
    let not_field = write_matrix(dir.path(), "six.txt", "6 1\n1\n");
    let cases: Vec<Vec<String>> = vec![
        vec!["verify".into(), "nonexistent".into(), "--max".into(), "2".into()],
        vec!["verify".into(), "conjecture1".into(), "--max".into(), "9".into()],
        vec!["conj5".into(), "--q".into(), "6".into(), "--m".into(), "1".into(), "--exhaustive".into()],
        vec!["conj5".into(), "--q".into(), "2".into(), "--m".into(), "1".into()],
        vec!["conj5".into(), "--q".into(), "2".into(), "--m".into(), "1".into(), "--trials".into(), "3".into()],
        vec!["eqmm".into(), "--q".into(), "3".into(), "--m".into(), "2".into(), "--exhaustive".into()],
        vec!["profile".into(), "--matrix".into(), bad.display().to_string(), "--lambda".into(), "1".into()],
        vec!["flags".into(), "--matrix".into(), not_field.display().to_string(), "--parts".into(), "1".into()],
        vec!["profile".into(), "--matrix".into(), dir.path().join("missing").display().to_string(), "--lambda".into(), "1".into()],
        vec!["frobnicate".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = qprove(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn profile_and_flags_print_counts() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_matrix(dir.path(), "diag123_f7.txt", "7 3\n1 0 0\n0 2 0\n0 0 3\n");
    let m = m.display().to_string();
    let o = qprove(&["profile", "--matrix", &m, "--lambda", "1,1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "36\n");
    let o = qprove(&["flags", "--matrix", &m, "--parts", "1,1,1"]);
    assert_eq!(stdout(&o), "6\n");
    let o = qprove(&["profile", "--matrix", &m, "--lambda", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eqmm_exhaustive_over_f2_and_f3() {
    for q in ["2", "3"] {
        let o = qprove(&["eqmm", "--q", q, "--m", "1", "--exhaustive"]);
        assert_eq!(o.status.code(), Some(0), "q={q}");
    }
}

#[test]
fn conj5_exhaustive_over_f2_reports_the_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c5.json");
    let o = qprove(&[
        "conj5",
        "--q",
        "2",
        "--m",
        "1",
        "--exhaustive",
        "--json",
        path.to_str().unwrap(),
    ]);
    // every matrix with a nonzero count sits a factor q above the formula
    assert_eq!(o.status.code(), Some(1));
    let report = read_json(&path);
    assert_eq!(report["results"].as_array().unwrap().len(), 512);
    assert_eq!(report["extras"]["matrices"], 512);
    assert_eq!(report["extras"]["sigma_over_rhs=q^1"], 412);
    assert_eq!(report["extras"]["sigma_over_rhs=0/0"], 100);
    assert!(stdout(&o).starts_with("conj5 q=2 m=1: 100 of 512 matrices verified"));
}

#[test]
fn reports_validate_against_schema() {
    let validator = schema();
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("c1.json", vec!["verify", "conjecture1", "--max", "2", "--emit-polys"]),
        ("ext.json", vec!["verify", "extension", "--max", "2"]),
        ("t.json", vec!["verify", "touchard", "--max", "3"]),
        ("c5.json", vec!["conj5", "--q", "3", "--m", "1", "--trials", "4", "--seed", "7"]),
        ("mm.json", vec!["eqmm", "--q", "2", "--m", "2", "--trials", "3", "--seed", "1"]),
    ];
    for (file, mut args) in runs {
        let path = dir.path().join(file);
        let p = path.to_str().unwrap().to_string();
        args.extend(["--json", &p]);
        qprove(&args);
        let report = read_json(&path);
        let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{file}: {errors:?}");
    }
    let ext = read_json(&dir.path().join("ext.json"));
    assert_eq!(ext["extras"]["calibrated_convention"], "none");
    assert_eq!(ext["success"], false);
    let c5 = read_json(&dir.path().join("c5.json"));
    assert_eq!(c5["seed"], 7);
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2", "4"] {
        for (tag, args) in [
            ("v", vec!["verify", "theorem2", "--max", "3", "--emit-polys"]),
            ("c", vec!["conj5", "--q", "2", "--m", "2", "--trials", "3", "--seed", "42"]),
        ] {
            let path = dir.path().join(format!("{tag}{threads}.json"));
            let p = path.to_str().unwrap().to_string();
            let mut full = vec!["--no-timing", "--threads", threads];
            full.extend(args);
            full.extend(["--json", &p]);
            let o = qprove(&full);
            outputs.push((tag, o.stdout, std::fs::read(&path).unwrap()));
        }
    }
    for tag in ["v", "c"] {
        let runs: Vec<_> = outputs.iter().filter(|(t, _, _)| *t == tag).collect();
        for r in &runs[1..] {
            assert_eq!(r.1, runs[0].1, "stdout differs for {tag}");
            assert_eq!(r.2, runs[0].2, "json differs for {tag}");
        }
    }
}

#[test]
fn thread_count_falls_back_to_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_qprove"))
        .args(["verify", "conj-1d", "--max", "3"])
        .env("QPROVE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_qprove"))
        .args(["verify", "conj-1d", "--max", "3"])
        .env("QPROVE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
