use std::fs;
use std::process::Command;

fn lab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ssf-lab"));
    c.env_remove("SSF_LAB_THREADS");
    c
}

fn code(c: &mut Command) -> i32 {
    c.output().unwrap().status.code().unwrap()
}

#[test]
fn passing_run_exits_zero_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = code(lab().args(["random", "--dim", "3", "--seed", "7", "--suites", "adjoint,krein", "--out"]).arg(&out));
    assert_eq!(status, 0);
    assert!(out.join("summary.json").exists());
    assert!(out.join("boundary.csv").exists());
}

#[test]
fn failing_suite_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    fs::write(&file, r#"{"name": "long", "pair": {"kind": "diagonal_series", "n": 100}, "suites": ["trace"]}"#).unwrap();
    assert_eq!(code(lab().arg("run").arg(&file).arg("--out").arg(dir.path().join("o"))), 1);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    fs::write(&file, r#"{"name": "bad", "pair": {"kind": "rank_one", "alpha": 0}}"#).unwrap();
    assert_eq!(code(lab().arg("run").arg(&file)), 2);
    assert_eq!(code(lab().arg("run").arg(dir.path().join("missing.json"))), 2);
    assert_eq!(code(lab().args(["random", "--dim", "2", "--seed", "1", "--suites", "nope"])), 2);
    assert_eq!(code(lab().args(["random", "--dim", "2", "--seed", "1", "--format", "png"])), 2);
    assert_eq!(code(lab().args(["random", "--dim", "2", "--seed", "1", "--suites", "adjoint"]).env("SSF_LAB_THREADS", "0")), 2);
}

#[test]
fn report_re_emits_plots_from_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let run = lab()
        .args(["example", "diagonal", "--n", "200", "--format", "json", "--out"])
        .arg(&out)
        .env("SSF_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    let plots = dir.path().join("plots");
    let status = code(lab().arg("report").arg(out.join("summary.json")).args(["--format", "svg", "--out"]).arg(&plots));
    assert_eq!(status, 0);
    assert!(plots.join("weakl1.svg").exists());
    assert!(!plots.join("zeta.svg").exists());
}
