//! End-to-end tests of the command-line tool: exit codes, file round
//! trips, and byte-for-byte determinism of reports.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ramified-zero"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ramified-zero")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ramified-zero-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_verify_round_trip() {
    let dir = tmpdir("roundtrip");
    let form = dir.join("form.json");
    let report = dir.join("report.json");
    let cert = dir.join("cert.json");

    let out = run(&[
        "random",
        "--e",
        "2",
        "--eisenstein",
        "-2,0",
        "--d",
        "6",
        "--s",
        "28",
        "--seed",
        "7",
        "--out",
        path_str(&form),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = run(&[
        "solve",
        "--input",
        path_str(&form),
        "--report",
        path_str(&report),
        "--certificate",
        path_str(&cert),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(report.exists() && cert.exists());

    let out = run(&[
        "verify",
        "--input",
        path_str(&form),
        "--certificate",
        path_str(&cert),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("verified"), "{stdout}");
}

#[test]
fn corrupted_certificate_is_rejected_with_exit_2() {
    let dir = tmpdir("corrupt");
    let form = dir.join("form.json");
    let cert = dir.join("cert.json");
    run(&[
        "random",
        "--e",
        "1",
        "--eisenstein",
        "-2",
        "--d",
        "6",
        "--s",
        "28",
        "--seed",
        "3",
        "--out",
        path_str(&form),
    ]);
    let out = run(&[
        "solve",
        "--input",
        path_str(&form),
        "--certificate",
        path_str(&cert),
    ]);
    assert_eq!(out.status.code(), Some(0));
    // scale the pivot coordinate by pi: no longer a unit
    let text = std::fs::read_to_string(&cert).unwrap();
    let mut parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let pivot = parsed["pivot"].as_u64().unwrap() as usize;
    let coeff = parsed["assignment"][pivot][0].as_i64().unwrap();
    parsed["assignment"][pivot][0] = serde_json::Value::from(coeff * 2);
    std::fs::write(&cert, serde_json::to_string(&parsed).unwrap()).unwrap();

    let out = run(&[
        "verify",
        "--input",
        path_str(&form),
        "--certificate",
        path_str(&cert),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bins_check_exhaustive_counts() {
    let out = run(&[
        "bins-check",
        "--m",
        "2",
        "--n",
        "5",
        "--exhaustive",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"checked\": 1024"), "{stdout}");
    assert!(stdout.contains("\"failures\": 0"), "{stdout}");
}

#[test]
fn bins_check_below_threshold_fails_with_exit_2() {
    // n = m + 2 admits avoiding assignments, so failures are nonzero
    let out = run(&["bins-check", "--m", "2", "--n", "4", "--exhaustive"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tmpdir("determinism");
    let form = dir.join("form.json");
    run(&[
        "random",
        "--e",
        "3",
        "--eisenstein",
        "-2,0,0",
        "--d",
        "6",
        "--s",
        "28",
        "--seed",
        "11",
        "--out",
        path_str(&form),
    ]);
    let r1 = dir.join("r1.json");
    let r2 = dir.join("r2.json");
    for r in [&r1, &r2] {
        let out = run(&[
            "solve",
            "--input",
            path_str(&form),
            "--seed",
            "5",
            "--report",
            path_str(r),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let b1 = std::fs::read(&r1).unwrap();
    let b2 = std::fs::read(&r2).unwrap();
    assert_eq!(b1, b2, "reports differ across identical invocations");

    // the generator is reproducible too
    let f2 = dir.join("form2.json");
    run(&[
        "random",
        "--e",
        "3",
        "--eisenstein",
        "-2,0,0",
        "--d",
        "6",
        "--s",
        "28",
        "--seed",
        "11",
        "--out",
        path_str(&f2),
    ]);
    assert_eq!(std::fs::read(&form).unwrap(), std::fs::read(&f2).unwrap());
}

#[test]
fn unknown_flags_are_rejected() {
    let out = run(&["solve", "--frobnicate", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unsolved_small_form_exits_2() {
    let dir = tmpdir("unsolved");
    let form = dir.join("form.json");
    std::fs::write(
        &form,
        r#"{"field": {"e": 1, "eisenstein": [-2]}, "d": 6, "coefficients": [[1], [2]]}"#,
    )
    .unwrap();
    let out = run(&["solve", "--input", path_str(&form)]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("unsolved"), "{stdout}");
}

#[test]
fn brute_finds_the_cancellation_zero() {
    let dir = tmpdir("brute");
    let form = dir.join("form.json");
    std::fs::write(
        &form,
        r#"{"field": {"e": 1, "eisenstein": [-2]}, "d": 6, "coefficients": [[5], [-5]]}"#,
    )
    .unwrap();
    let out = run(&[
        "brute",
        "--input",
        path_str(&form),
        "--n-small",
        "4",
        "--support",
        "2",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(parsed["count"].as_u64().unwrap() > 0);
}

#[test]
fn normalize_reports_rotation() {
    let dir = tmpdir("normalize");
    let form = dir.join("form.json");
    std::fs::write(
        &form,
        r#"{"field": {"e": 1, "eisenstein": [-2]}, "d": 6,
           "coefficients": [[4], [4], [4], [1]]}"#,
    )
    .unwrap();
    let out = run(&["normalize", "--input", path_str(&form)]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rotation: 4"), "{stdout}");
}

#[test]
fn dispatch_report_writes_classification() {
    let dir = tmpdir("dispatch");
    let out_path = dir.join("report.json");
    let out = run(&[
        "dispatch-report",
        "--d",
        "6",
        "--s",
        "28",
        "--m",
        "3",
        "--e",
        "2",
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(parsed["total_profiles"].as_u64().unwrap() > 0);
    let exemplars = parsed["fallback_exemplars"].as_array().unwrap();
    let awkward = serde_json::json!([9, 1, 9, 1, 7, 1]);
    assert!(
        exemplars.contains(&awkward),
        "expected the known fallback profile among {exemplars:?}"
    );
}

#[test]
fn solve_respects_target_flag() {
    let dir = tmpdir("target");
    let form = dir.join("form.json");
    run(&[
        "random",
        "--e",
        "1",
        "--eisenstein",
        "-2",
        "--d",
        "6",
        "--s",
        "28",
        "--seed",
        "5",
        "--out",
        path_str(&form),
    ]);
    let cert = dir.join("cert.json");
    let out = run(&[
        "solve",
        "--input",
        path_str(&form),
        "--target",
        "20",
        "--certificate",
        path_str(&cert),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(parsed["n_target"].as_u64(), Some(20));
}

#[test]
fn sample_form_solves_and_round_trips() {
    let samples = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples");
    let form = samples.join("q2_d6_allones.json");
    assert!(form.exists(), "missing {form:?}");
    let dir = tmpdir("sample");
    let cert = dir.join("cert.json");
    let out = run(&[
        "solve",
        "--input",
        path_str(&form),
        "--certificate",
        path_str(&cert),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(&[
        "verify",
        "--input",
        path_str(&form),
        "--certificate",
        path_str(&cert),
    ]);
    assert_eq!(out.status.code(), Some(0));
}
