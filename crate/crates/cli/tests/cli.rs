use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pinner(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinner"))
        .args(args)
        .current_dir(dir)
        .env_remove("PINNER_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn zeros_file(dir: &TempDir, zeros: &[(f64, f64)]) -> PathBuf {
    let entries: Vec<String> = zeros
        .iter()
        .map(|(re, im)| format!(r#"{{"re": {re}, "im": {im}}}"#))
        .collect();
    write(
        dir,
        "zeros.json",
        &format!(r#"{{"zeros": [{}]}}"#, entries.join(", ")),
    )
}

#[test]
fn inner_single_zero_has_norm_two_at_p_two() {
    let dir = TempDir::new().unwrap();
    let zeros = zeros_file(&dir, &[(0.5, 0.0)]);
    let out = dir.path().join("inner.json");
    for method in ["closed", "newton", "project"] {
        let run = pinner(
            &[
                "inner",
                "--zeros",
                zeros.to_str().unwrap(),
                "--method",
                method,
                "--out",
                out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert_eq!(
            run.status.code(),
            Some(0),
            "{method}: {}",
            String::from_utf8_lossy(&run.stderr)
        );
        let norm = read_json(&out)["result"]["norm"].as_f64().unwrap();
        assert!((norm - 2.0).abs() < 1e-9, "{method}: {norm}");
    }
}

#[test]
fn inner_rejects_bad_zero_sets() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.json", "");
    let run = pinner(&["inner", "--zeros", empty.to_str().unwrap()], dir.path());
    assert_eq!(run.status.code(), Some(2));

    let no_zeros = write(&dir, "none.json", r#"{"zeros": []}"#);
    let run = pinner(
        &["inner", "--zeros", no_zeros.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(2));

    let origin = zeros_file(&dir, &[(0.0, 0.0)]);
    let run = pinner(&["inner", "--zeros", origin.to_str().unwrap()], dir.path());
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("zeros must be nonzero"));

    let missing = dir.path().join("missing.json");
    let run = pinner(&["inner", "--zeros", missing.to_str().unwrap()], dir.path());
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn closed_form_needs_a_single_zero() {
    let dir = TempDir::new().unwrap();
    let zeros = zeros_file(&dir, &[(0.5, 0.0), (0.1, 0.2)]);
    let run = pinner(
        &[
            "inner",
            "--zeros",
            zeros.to_str().unwrap(),
            "--method",
            "closed",
        ],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn invalid_exponent_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let zeros = zeros_file(&dir, &[(0.5, 0.0)]);
    let run = pinner(
        &["--p", "1.0", "inner", "--zeros", zeros.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn solver_failure_writes_diagnostics() {
    let dir = TempDir::new().unwrap();
    let zeros = zeros_file(&dir, &[(0.9, 0.0), (-0.8, 0.3)]);
    let out = dir.path().join("inner.json");
    let run = pinner(
        &[
            "--p",
            "1.5",
            "--max-iters",
            "1",
            "--out",
            out.to_str().unwrap(),
            "inner",
            "--zeros",
            zeros.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        run.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let diag = read_json(&dir.path().join("inner.json.diagnostics.json"));
    assert_eq!(diag["kind"], "non_convergence");
    assert!(diag["last_iterate"].is_array());
}

#[test]
fn project_reports_the_co_projection() {
    let dir = TempDir::new().unwrap();
    // f = 1 - 2z has its zero at 1/2
    let coeffs = write(&dir, "f.json", "[[1.0, 0.0], [-2.0, 0.0]]");
    let out = dir.path().join("proj.json");
    let run = pinner(
        &[
            "project",
            "--coeffs",
            coeffs.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let norm = read_json(&out)["result"]["norm"].as_f64().unwrap();
    assert!((norm - 2.0).abs() < 1e-8);

    let bad = write(&dir, "bad.json", "[[1.0]]");
    let run = pinner(&["project", "--coeffs", bad.to_str().unwrap()], dir.path());
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn zeroset_csv_matches_blaschke_norms() {
    let dir = TempDir::new().unwrap();
    let zeros = zeros_file(&dir, &[(0.5, 0.0), (0.6, 0.0), (0.7, 0.0)]);
    let csv_path = dir.path().join("cert.csv");
    let out = dir.path().join("cert.json");
    let run = pinner(
        &[
            "zeroset",
            "--zeros",
            zeros.to_str().unwrap(),
            "--csv",
            csv_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        vec!["n", "j_norm", "phi_norm", "bound"]
    );
    let norms: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    let expected = [2.0, 10.0 / 3.0, 100.0 / 21.0];
    assert_eq!(norms.len(), 3);
    for (a, b) in norms.iter().zip(expected) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    let json = read_json(&out);
    assert!(json["certificate"]["failure"].is_null());
}

#[test]
fn zeroset_rejects_empty_prefix() {
    let dir = TempDir::new().unwrap();
    let zeros = zeros_file(&dir, &[(0.5, 0.0)]);
    let run = pinner(
        &[
            "zeroset",
            "--zeros",
            zeros.to_str().unwrap(),
            "--n-max",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(2));
    let run = pinner(
        &[
            "zeroset",
            "--zeros",
            zeros.to_str().unwrap(),
            "--n-max",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn zeroset_diag_emits_requested_columns() {
    let dir = TempDir::new().unwrap();
    let zeros = zeros_file(&dir, &[(0.5, 0.0), (0.75, 0.0), (0.875, 0.0)]);
    let csv_path = dir.path().join("diag.csv");
    let run = pinner(
        &[
            "zeroset",
            "diag",
            "--zeros",
            zeros.to_str().unwrap(),
            "--blaschke",
            "--newman",
            "--vinogradov-eps",
            "0.5",
            "--csv",
            csv_path.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        vec![
            "n",
            "modulus",
            "multiplicity",
            "blaschke",
            "newman_ratio",
            "vinogradov"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(&rows[2][3], "0.875");
    assert_eq!(&rows[1][4], "0.5");
    assert_eq!(&rows[0][4], "");

    let only = dir.path().join("only.csv");
    pinner(
        &[
            "zeroset",
            "diag",
            "--zeros",
            zeros.to_str().unwrap(),
            "--newman",
            "--csv",
            only.to_str().unwrap(),
        ],
        dir.path(),
    );
    let mut reader = csv::Reader::from_path(&only).unwrap();
    assert_eq!(reader.headers().unwrap().len(), 4);
}

#[test]
fn construct_nonblaschke_writes_family_and_roots() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("family.json");
    let roots = dir.path().join("roots.csv");
    let run = pinner(
        &[
            "--p",
            "3.0",
            "construct",
            "--family",
            "nonblaschke",
            "--alpha",
            "0.5",
            "--k-max",
            "6",
            "--out",
            out.to_str().unwrap(),
            "--emit-roots",
            roots.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let json = read_json(&out);
    assert_eq!(json["term_count"], 5040);
    assert!(json["exact_norm_pow"].as_f64().unwrap() <= json["bound_product"].as_f64().unwrap());
    assert_eq!(json["blaschke_partials"].as_array().unwrap().len(), 6);
    let mut reader = csv::Reader::from_path(&roots).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        vec!["level", "modulus", "count", "spacing"]
    );
    let counts: Vec<u64> = reader
        .records()
        .map(|r| r.unwrap()[2].parse().unwrap())
        .collect();
    assert_eq!(counts, vec![1, 2, 6, 24, 120, 720]);
}

#[test]
fn construct_checks_family_parameters() {
    let dir = TempDir::new().unwrap();
    let run = pinner(
        &["--p", "2.0", "construct", "--family", "nonblaschke"],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(2));
    let run = pinner(
        &["construct", "--family", "slow", "--k-max", "7"],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(3));
    let run = pinner(&["construct", "--family", "slow", "--a", "0.5"], dir.path());
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn construct_slow_and_geometric() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("slow.json");
    let run = pinner(
        &[
            "--p",
            "3",
            "construct",
            "--family",
            "slow",
            "--k-max",
            "3",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(read_json(&out)["term_count"], 30);

    let out = dir.path().join("geo.json");
    let run = pinner(
        &[
            "construct",
            "--family",
            "geometric",
            "--n",
            "4",
            "--rotate",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let json = read_json(&out);
    assert_eq!(json["total_roots"], 10);
    assert!(json["exact_norm"].as_f64().unwrap() <= json["norm_bound"].as_f64().unwrap());
}

#[test]
fn verify_is_deterministic_and_passes() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let run = pinner(
            &[
                "--seed",
                "42",
                "verify",
                "--suite",
                "pythagorean",
                "--out",
                path.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert_eq!(
            run.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&run.stderr)
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let json = read_json(&a);
    assert_eq!(json["reports"].as_array().unwrap().len(), 5);
    assert!(json["reports"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["cases_run"] == 1000));

    let run = pinner(&["verify", "--suite", "involution"], dir.path());
    assert_eq!(run.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert!(report["reports"][0]["max_violation"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn verify_cross_method_meets_tolerance() {
    let dir = TempDir::new().unwrap();
    let run = pinner(&["verify", "--suite", "cross-method"], dir.path());
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let report: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert!(report["reports"][0]["max_violation"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn verify_failure_exits_one() {
    // a single Newton iteration cannot reach the cross-method tolerance
    let dir = TempDir::new().unwrap();
    let run = pinner(
        &["--max-iters", "1", "verify", "--suite", "cross-method"],
        dir.path(),
    );
    assert_eq!(
        run.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let diag = read_json(&dir.path().join("pinner-diagnostics.json"));
    assert_eq!(diag["kind"], "verification");
    assert!(diag["failures"][0]["worst_case"].is_object());
}

#[test]
fn threads_flag_and_env_are_accepted() {
    let dir = TempDir::new().unwrap();
    let zeros = zeros_file(&dir, &[(0.5, 0.0), (0.6, 0.0)]);
    let run = pinner(
        &[
            "--threads",
            "2",
            "zeroset",
            "--zeros",
            zeros.to_str().unwrap(),
            "--parallel",
        ],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(0));
    let run = Command::new(env!("CARGO_BIN_EXE_pinner"))
        .args(["zeroset", "--zeros", zeros.to_str().unwrap()])
        .env("PINNER_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
}
