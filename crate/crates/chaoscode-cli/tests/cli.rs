//! End-to-end checks of the `chaoscode` binary: subcommand output, exit
//! codes, CSV emission, and config-file/flag precedence.

use std::path::Path;
use std::process::{Command, Output};

fn chaoscode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoscode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn rate_prints_reduced_fraction() {
    let out = chaoscode(&["rate", "--code", "tent-turbo", "--n", "6", "--puncture"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1/11");

    let out = chaoscode(&["rate", "--code", "baker-turbo", "--n", "3"]);
    assert_eq!(stdout(&out).trim(), "1/6");

    let out = chaoscode(&["rate", "--code", "tent", "--n", "11"]);
    assert_eq!(stdout(&out).trim(), "1/11");
}

#[test]
fn segments_prints_count_first() {
    let out = chaoscode(&["segments", "--code", "baker-turbo", "--n", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "16");

    let out = chaoscode(&["segments", "--code", "tent", "--n", "2", "--regions"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "2");
    assert!(lines.next().unwrap().starts_with("segment 0:"));
}

#[test]
fn missing_code_is_a_config_error() {
    let out = chaoscode(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = chaoscode(&["rate", "--code", "waffle", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = chaoscode(&["simulate", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(2));
    // Puncturing a non-turbo family is rejected.
    let out = chaoscode(&["rate", "--code", "tent", "--n", "3", "--puncture"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_with_stable_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = chaoscode(&[
        "simulate", "--code", "baker", "--n", "2", "--snr-start", "0", "--snr-stop", "10",
        "--snr-step", "5", "--trials", "100", "--seed", "9", "--threads", "2", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "system,snr_db,sigma2,trials,mse,log2_mse,wall_seconds");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("baker-n2,0,"));
}

fn strip_wall(text: &str) -> String {
    text.lines()
        .map(|l| l.rsplit_once(',').unwrap().0)
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(
        &cfg,
        "# fig-2 style run, tiny\ncode = tent-turbo\nn = 3\npuncture = true\n\
         snr-start = 0\nsnr-stop = 4\nsnr-step = 2\ntrials = 50\nseed = 5\nthreads = 1\n",
    )
    .unwrap();
    let from_file = dir.path().join("a.csv");
    let out = chaoscode(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--out", from_file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&from_file).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("tent-turbo-n3-punct,0,"));

    // A flag overrides the file's value for the same key.
    let overridden = dir.path().join("b.csv");
    let out = chaoscode(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--trials", "25", "--out",
        overridden.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text_b = std::fs::read_to_string(&overridden).unwrap();
    assert!(text_b.lines().nth(1).unwrap().contains(",25,"));

    // Identical config reruns are byte-identical apart from wall_seconds.
    let rerun = dir.path().join("c.csv");
    let out = chaoscode(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--out", rerun.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        strip_wall(&text),
        strip_wall(&std::fs::read_to_string(&rerun).unwrap())
    );
}

#[test]
fn config_file_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "waffles = 7\n").unwrap();
    let out = chaoscode(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // Missing config file is an I/O (runtime) failure.
    let missing = dir.path().join("nope.cfg");
    let out = chaoscode(&["simulate", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn genie_and_baseline_subcommands_run() {
    let out = chaoscode(&[
        "genie", "--n", "4", "--snr-start", "10", "--snr-stop", "10", "--snr-step", "1",
        "--trials", "100", "--seed", "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("tent-n4-genie,10,"));

    let out = chaoscode(&[
        "baseline", "--bits", "3", "--snr-start", "20", "--snr-stop", "20", "--snr-step", "1",
        "--trials", "3", "--seed", "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("digital-3bit-2pam,20,"));

    // 4-bit quantization cannot meet the 1:6 expansion.
    let out = chaoscode(&["baseline", "--bits", "4", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));

    assert!(Path::new(env!("CARGO_BIN_EXE_chaoscode")).exists());
}
