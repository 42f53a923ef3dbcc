use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn updown(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_updown")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_run(name: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--scenario", name, "--out", out.to_str().unwrap(), "--horizon", "3000", "--replicas", "3"];
    args.extend_from_slice(extra);
    updown(&args)
}

#[test]
fn lists_and_shows_scenarios() {
    let o = updown(&["scenarios", "list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["A ", "B ", "C ", "D ", "E "] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{text}");
    }
    let o = updown(&["scenarios", "show", "b"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"seed\": 202"));
    assert_eq!(updown(&["scenarios", "show", "Q"]).status.code(), Some(2));
}

#[test]
fn run_then_verify_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let run = small_run("B", tmp.path(), &[]);
    let code = run.status.code().unwrap();
    assert!(code == 0 || code == 1, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout(&run).contains("identity at alpha=1"));
    assert!(tmp.path().join("summary.json").is_file());
    let v = updown(&["verify", tmp.path().to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(code));
}

#[test]
fn sequential_flag_gives_the_same_report() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("par"), tmp.path().join("seq"));
    small_run("D", &a, &[]);
    small_run("D", &b, &["--sequential"]);
    for f in ["summary.json", "decomposition.csv", "lst_time_average.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn tampered_summary_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    small_run("C", tmp.path(), &[]);
    let path = tmp.path().join("summary.json");
    let text = fs::read_to_string(&path).unwrap();
    let bumped = text.replacen("\"value\": ", "\"value\": 1000", 1);
    fs::write(&path, bumped).unwrap();
    let v = updown(&["verify", tmp.path().to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).contains("FAIL "));

    fs::write(&path, "[]").unwrap();
    assert_eq!(updown(&["verify", tmp.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn bad_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"scenario": {"horizon": "soon"}}"#).unwrap();
    let o = updown(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("E_"));
    assert!(!tmp.path().join("o").exists());
    assert_eq!(updown(&["run", "--scenario", "A", "--horizon", "0"]).status.code(), Some(2));
}

#[test]
fn config_file_round_trip_and_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let shown = stdout(&updown(&["scenarios", "show", "A"]));
    let cfg = tmp.path().join("a.json");
    fs::write(&cfg, shown).unwrap();
    let out = tmp.path().join("paths");
    let o = updown(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
        "--horizon", "50", "--replicas", "2", "--seed-override", "7",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("wrote"));
    assert!(fs::read_dir(&out).unwrap().count() >= 2);
}
