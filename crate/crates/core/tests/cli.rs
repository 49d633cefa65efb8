//! End-to-end runs of the `schottky-lax` binary: exit codes and output shapes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::DMatrix;
use num_complex::Complex64;
use schottky_lax::config::{make_reference, ReferenceKind, RunConfig, DEFAULT_SEED};
use schottky_lax::verify::CheckReport;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_schottky-lax"));
    c.env_remove("SCHOTTKY_LOG");
    c
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, cfg: &RunConfig) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, cfg.to_json().unwrap()).unwrap();
    p
}

fn reports(text: &str) -> Vec<CheckReport> {
    text.lines().map(|l| serde_json::from_str(l).expect("one JSON report per line")).collect()
}

#[test]
fn shipped_configs_are_the_seeded_references() {
    for (file, kind) in [("genus1.json", ReferenceKind::Genus1), ("genus2.json", ReferenceKind::Genus2)] {
        let on_disk = std::fs::read_to_string(shipped(file)).unwrap();
        assert_eq!(on_disk, make_reference(kind, DEFAULT_SEED).unwrap().to_json().unwrap(), "{file} is stale");
    }
}

#[test]
fn make_reference_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&["make-reference", "genus2", "--seed", "11", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = run(&["make-reference", "genus2", "--seed", "12"]);
    assert_ne!(o.stdout, std::fs::read(&a).unwrap(), "the seed must matter");
    let o = run(&["validate", "--config", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn validate_accepts_the_genus_one_reference() {
    let o = run(&["validate", "--config", shipped("genus1.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"lemma1-criterion"));
    assert!(names.contains(&"disjoint"));
}

#[test]
fn validate_rejects_a_contraction_factor_above_one() {
    let mut cfg = make_reference(ReferenceKind::Genus1, DEFAULT_SEED).unwrap();
    cfg.phase.g[0] = DMatrix::identity(2, 2);
    let at_identity = cfg.kappa().unwrap();
    // ‖Ad diag(t, 1/t)‖ = t², and the same for the inverse.
    let t = (1.2 / at_identity).sqrt();
    cfg.phase.g[0] = DMatrix::from_diagonal(&nalgebra::dvector![Complex64::new(t, 0.0), Complex64::new(1.0 / t, 0.0)]);
    assert!((cfg.kappa().unwrap() - 1.2).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "k.json", &cfg);
    let o = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let failing: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["lemma1-criterion"]);
    assert!(stderr(&o).contains("lemma1-criterion"));

    let o = run(&["check", "--config", path.to_str().unwrap(), "--checks", "twist"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_configs_are_usage_errors_with_locations() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"algebra\": {\"n\": 2,\n  \"kind\": }").unwrap();
    let o = run(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let mut v: serde_json::Value = serde_json::from_str(&make_reference(ReferenceKind::Genus1, 7).unwrap().to_json().unwrap()).unwrap();
    v["schottky"]["pairs"][0]["inner"]["radius"] = serde_json::json!("wide");
    let typed = dir.path().join("typed.json");
    std::fs::write(&typed, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = run(&["validate", "--config", typed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("schottky.pairs[0].inner.radius"), "{}", stderr(&o));

    let o = run(&["validate", "--config", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn check_emits_one_passing_line_per_requested_check() {
    let cfg = shipped("genus1.json");
    let o = run(&["check", "--config", cfg.to_str().unwrap(), "--checks", "twist,pairing,rmatrix"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rs = reports(&stdout(&o));
    let names: Vec<&str> = rs.iter().map(|r| r.check_name.as_str()).collect();
    assert_eq!(names, ["twist", "pairing", "rmatrix"]);
    assert!(rs.iter().all(|r| r.pass && r.residual <= r.tolerance));
}

#[test]
fn check_writes_to_the_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let cfg = shipped("genus1.json");
    let o = run(&["check", "--config", cfg.to_str().unwrap(), "--checks", "antisymmetry", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(reports(&std::fs::read_to_string(out).unwrap()).len(), 1);
}

#[test]
fn unknown_check_is_a_usage_error() {
    let cfg = shipped("genus1.json");
    let o = run(&["check", "--config", cfg.to_str().unwrap(), "--checks", "twist,monodromy"]);
    assert_eq!(o.status.code(), Some(64));
    let err = stderr(&o);
    assert!(err.contains("monodromy") && err.contains("Usage"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_flags_are_usage_errors() {
    let cfg = shipped("genus1.json");
    let cfg = cfg.to_str().unwrap();
    assert_eq!(run(&["check", "--config", cfg, "--tolerance", "twist"]).status.code(), Some(64));
    assert_eq!(run(&["check", "--config", cfg, "--tolerance", "warp=1e-3"]).status.code(), Some(64));
    assert_eq!(run(&["check", "--config", cfg, "--seed", "minus-one"]).status.code(), Some(64));
    assert_eq!(run(&["transmogrify"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn tolerance_override_can_fail_a_check() {
    let cfg = shipped("genus1.json");
    let o = run(&["check", "--config", cfg.to_str().unwrap(), "--checks", "pairing", "--tolerance", "pairing=1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    let r = &reports(&stdout(&o))[0];
    assert_eq!(r.tolerance, 1e-30);
    assert!(!r.pass);
}

#[test]
fn dybe_at_short_word_length_fails_on_its_tail_budget() {
    let cfg = shipped("genus1.json");
    let o = run(&["check", "--config", cfg.to_str().unwrap(), "--checks", "dybe", "--max-word-length", "3"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let r = &reports(&stdout(&o))[0];
    assert!(!r.pass);
    assert!(r.tail_budget > r.tolerance, "budget {} should dominate", r.tail_budget);
    assert!(r.tail_budget > r.residual);
    assert!(r.notes.iter().any(|n| n.contains("truncation dominates")));
}

#[test]
fn seed_changes_the_samples_but_not_the_verdict() {
    let cfg = shipped("genus1.json");
    let cfg = cfg.to_str().unwrap();
    let a = reports(&stdout(&run(&["check", "--config", cfg, "--checks", "rmatrix", "--seed", "1"])));
    let b = reports(&stdout(&run(&["check", "--config", cfg, "--checks", "rmatrix", "--seed", "2"])));
    assert_ne!(a[0].samples, b[0].samples);
    assert!(a[0].pass && b[0].pass);
}

fn scan_rows(text: &str) -> BTreeMap<String, Vec<(usize, f64, f64)>> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,value,check,residual,tolerance,tailBudget,pass,runtimeMs"));
    let mut out: BTreeMap<String, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 8, "{l}");
        out.entry(f[2].to_string()).or_default().push((f[1].parse().unwrap(), f[3].parse().unwrap(), f[5].parse().unwrap()));
    }
    out
}

#[test]
fn word_length_scan_has_nine_rows_per_check_and_decays() {
    let cfg = shipped("genus1.json");
    let o = run(&["scan", "--config", cfg.to_str().unwrap(), "--checks", "twist,rmatrix,dybe", "maxWordLength", "0..8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = scan_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    for (check, v) in &rows {
        assert_eq!(v.len(), 9, "{check}");
        assert_eq!(v.iter().map(|r| r.0).collect::<Vec<_>>(), (0..=8).collect::<Vec<_>>());
        // Geometric decay once the first shells are in: L = 3..8.
        for w in v[3..].windows(2) {
            assert!(w[1].1 < w[0].1, "{check}: residual rose from {} to {}", w[0].1, w[1].1);
        }
        assert!(v[8].1 < 1e-2 * v[3].1, "{check}: {:?}", v);
    }
}

#[test]
fn node_scan_shows_faster_than_algebraic_decay() {
    let cfg = shipped("genus1.json");
    let o = run(&["scan", "--config", cfg.to_str().unwrap(), "--checks", "lemma3", "quadratureNodes", "32,64,128"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = scan_rows(&stdout(&o));
    let err: Vec<f64> = rows["lemma3"].iter().map(|r| r.2).collect();
    assert_eq!(err.len(), 3);
    // Each doubling gains more digits than the one before.
    let gain1 = (err[0] / err[1]).log2();
    let gain2 = (err[1] / err[2]).log2();
    assert!(gain1 > 2.0 && gain2 > gain1, "{err:?}");
}

#[test]
fn empty_scan_range_is_a_usage_error() {
    let cfg = shipped("genus1.json");
    for range in ["5..2", ""] {
        let o = run(&["scan", "--config", cfg.to_str().unwrap(), "maxWordLength", range]);
        assert_eq!(o.status.code(), Some(64), "range {range:?}");
        assert!(o.stdout.is_empty());
    }
    let o = run(&["scan", "--config", cfg.to_str().unwrap(), "shellCount", "0..3"]);
    assert_eq!(o.status.code(), Some(64));
}
