//! CLI surface tests beyond the acceptance criteria: batch mode, corpus
//! export round-trips, smoothness from a stored CSV, and strict-schema
//! rejection.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracivp"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const CASE_A: &str = r#"
orders = [0.4, 2.6]
initial_values = [0.0, 0.0, 0.0]
horizon = 1.0
rhs = "gamma(4)/gamma(1.4)*t^0.4 + y1 - gamma(4)/gamma(3.6)*t^2.6"

[grid]
n = 256
grading = 2.0
"#;

const CASE_B: &str = r#"
orders = [1.0, 2.5]
initial_values = [0.0, 1.0, 2.0]
horizon = 1.0
rhs = "y1 - 1 - 2*t"

[grid]
n = 256
grading = 2.0
"#;

#[test]
fn batch_solves_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.toml", CASE_A);
    write(dir.path(), "b.toml", CASE_B);
    let out_dir = dir.path().join("out");
    let st = bin()
        .args(["solve", "--batch"])
        .arg(dir.path())
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(st.success());
    for stem in ["a", "b"] {
        let csv = std::fs::read_to_string(out_dir.join(format!("{stem}.csv"))).unwrap();
        assert!(csv.starts_with("t,v,u,residual\n"));
        assert_eq!(csv.lines().count(), 258); // header + 257 nodes
        let report = std::fs::read_to_string(out_dir.join(format!("{stem}.report.toml"))).unwrap();
        assert!(report.contains("converged = true"));
    }
}

#[test]
fn batch_propagates_worst_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.toml", CASE_A);
    write(
        dir.path(),
        "unsupported.toml",
        "orders = [1.8, 2.2]\ninitial_values = [0, 0, 0]\nhorizon = 1.0\nrhs = \"y1\"\n",
    );
    let st = bin()
        .args(["solve", "--batch"])
        .arg(dir.path())
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn corpus_export_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    for id in ["counterexample1", "counterexample2"] {
        let exported = dir.path().join(format!("{id}.toml"));
        let st = bin()
            .args(["corpus", "export", id, "--out"])
            .arg(&exported)
            .status()
            .unwrap();
        assert!(st.success());
        // the exported file carries its force flags, so it solves directly;
        // shrink the grid to keep the round trip fast
        let csv = dir.path().join(format!("{id}.csv"));
        let st = bin()
            .arg("solve")
            .arg(&exported)
            .args(["--grid-n", "256"])
            .arg("--out")
            .arg(&csv)
            .arg("--report")
            .arg(dir.path().join(format!("{id}.report.toml")))
            .status()
            .unwrap();
        assert!(st.success(), "{id} export did not solve");
        let report =
            std::fs::read_to_string(dir.path().join(format!("{id}.report.toml"))).unwrap();
        assert!(report.contains("no equivalence guarantee"), "{id} lacks the watermark");
    }
}

#[test]
fn smoothness_from_stored_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "ce1.toml", "");
    let st = bin()
        .args(["corpus", "export", "counterexample1", "--out"])
        .arg(&file)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = dir.path().join("ce1.csv");
    let st = bin()
        .arg("solve")
        .arg(&file)
        .args(["--grid-n", "1024"])
        .arg("--out")
        .arg(&csv)
        .arg("--report")
        .arg(dir.path().join("r.toml"))
        .status()
        .unwrap();
    assert!(st.success());
    let out = bin()
        .arg("smoothness")
        .arg(&file)
        .arg("--from-csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("cm_verdict = false"), "smoothness output:\n{text}");
    assert!(text.contains("target_order = 3"));
}

#[test]
fn strict_schema_rejects_typos() {
    let dir = tempfile::tempdir().unwrap();
    // "gridd" is a typo; strict parsing must fail rather than fall back
    let bad = write(
        dir.path(),
        "typo.toml",
        "orders = [0.4, 2.6]\ninitial_values = [0, 0, 0]\nhorizon = 1.0\nrhs = \"y1\"\n[gridd]\nn = 8\n",
    );
    let out = bin().arg("classify").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("gridd") || msg.contains("unknown field"), "stderr: {msg}");
}

#[test]
fn existence_rejects_bad_radius() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "badk.toml",
        "orders = [0.4, 2.6]\ninitial_values = [0, 0, 0]\nhorizon = 1.0\nrhs = \"y1\"\n[existence]\nk = -1.0\nsamples = 11\n",
    );
    let st = bin().arg("existence").arg(&f).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn solve_to_stdout_when_no_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "a.toml", CASE_A);
    let out = bin().arg("solve").arg(&f).args(["--grid-n", "16"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,v,u,residual\n"));
    assert_eq!(text.lines().count(), 18);
    // run report lands on stderr
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("[convergence]"));
}
