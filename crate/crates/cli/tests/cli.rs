use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn regmhd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regmhd"))
        .args(args)
        .env("REGMHD_THREADS", "2")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, extra: &str) -> String {
    let path = dir.join(name);
    let text = format!(
        "system.variant = thm1\nsystem.beta = 0.8\nsystem.gamma = 0.5\ngrid.n = 16\n\
         stepper.dt = 0.01\nstepper.t_end = 0.1\noutput.dir = {}\n{extra}",
        dir.join("out").display()
    );
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_then_resume_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "");
    let out = regmhd(&["run", &cfg]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let chk = dir.path().join("out/final.chk");
    assert!(chk.is_file());

    let next = dir.path().join("next");
    let out = regmhd(&[
        "resume",
        chk.to_str().unwrap(),
        "--t-end",
        "0.2",
        "--config",
        &cfg,
        "--out",
        next.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("t = 0.2 "));

    let out = regmhd(&["report", next.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("E_mono"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "system.variant = thm2\nsystem.alpha = 1\nsystem.gamma = 0.5\n").unwrap();
    assert_eq!(code(&regmhd(&["run", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&regmhd(&["run", dir.path().join("missing.cfg").to_str().unwrap()])), 2);
    let cfg = write_config(dir.path(), "a.cfg", "");
    assert_eq!(code(&regmhd(&["sweep", &cfg, "--axis", "delta=1,2"])), 2);
    assert_eq!(code(&regmhd(&["resume", dir.path().join("none.chk").to_str().unwrap(), "--t-end", "1"])), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_regmhd"))
        .args(["report", dir.path().to_str().unwrap()])
        .env("REGMHD_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn blowup_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "stepper.blowup_ceiling = 0.5\n");
    let out = regmhd(&["run", &cfg]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blow-up"));
}

#[test]
fn sweep_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "");
    let out = regmhd(&["sweep", &cfg, "--axis", "beta=0.6:0.8:0.2", "--axis", "gamma=0.4,0.8"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("cell,alpha,beta,gamma,covered"));
    let out = regmhd(&["report", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(stdout(&out).lines().count(), 5);
}

#[test]
fn check_passes_for_a_covered_system() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "");
    let out = regmhd(&["check", &cfg]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0, "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 8);
}
