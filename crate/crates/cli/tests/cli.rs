//! End-to-end checks of the command-line surface: exit codes, artifact
//! round-trips and config handling.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lpv-dpc")
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .args(["--out", out_dir.to_str().unwrap()])
        .output()
        .expect("binary executes")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lpv-dpc-cli-{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn generate_writes_artifacts_and_certificate() {
    let dir = temp_dir("generate");
    let out = run(&["generate", "--experiment", "example1", "--seed", "42"], &dir);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("order 7 rank 21/21 -> pass"), "{stdout}");
    assert!(dir.join("example1/dictionary.csv").exists());
    assert!(dir.join("example1/dictionary.meta").exists());

    // The emitted dictionary round-trips through check-pe.
    let csv = dir.join("example1/dictionary.csv");
    let meta = dir.join("example1/dictionary.meta");
    let out = run(
        &[
            "check-pe",
            "--experiment",
            "example1",
            "--dict",
            csv.to_str().unwrap(),
            "--meta",
            meta.to_str().unwrap(),
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn generate_example2_records_34_samples() {
    let dir = temp_dir("generate2");
    let out = run(&["generate", "--experiment", "example2", "--seed", "42"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("34 samples"), "{stdout}");
    assert!(stdout.contains("rank 14/14 -> pass"), "{stdout}");
    let meta = std::fs::read_to_string(dir.join("example2/dictionary.meta")).unwrap();
    assert!(meta.contains("n_d = 34"));
    assert!(meta.contains("recipe = multisine harmonics=8 amplitude=0.25"));
}

#[test]
fn zero_windows_give_zero_prediction_file() {
    let dir = temp_dir("zerowin");
    let path = dir.join("windows.csv");
    let mut text = String::from("k,u_1,p_1,p_2,y_1\n");
    for k in 1..=7 {
        text.push_str(&format!("{k},0,0.5,0.25,0\n"));
    }
    std::fs::write(&path, text).unwrap();
    let out = run(
        &["simulate", "--experiment", "example1", "--windows", path.to_str().unwrap()],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let prediction = std::fs::read_to_string(dir.join("example1/prediction.csv")).unwrap();
    for line in prediction.lines().skip(1) {
        let y_hat: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(y_hat.abs() < 1e-10, "nonzero prediction {line}");
    }
}

#[test]
fn short_dictionary_exits_with_excitation_code() {
    let dir = temp_dir("short");
    let out = run(&["generate", "--experiment", "example1", "--nd", "10"], &dir);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_config_exits_with_parse_code() {
    let dir = temp_dir("badcfg");
    let cfg_path = dir.join("bad.cfg");
    std::fs::write(&cfg_path, "[experiment]\nseeed = 42\n").unwrap();
    let out = run(
        &["run", "--experiment", "example1", "--config", cfg_path.to_str().unwrap()],
        &dir,
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown key 'seeed'"), "{stderr}");
}

#[test]
fn malformed_windows_csv_exits_with_parse_code() {
    let dir = temp_dir("badcsv");
    let path = dir.join("windows.csv");
    std::fs::write(&path, "k,u_1,p_1,p_2,y_1\n1,0.1,0.2,0.04,not-a-number\n").unwrap();
    let out = run(
        &["simulate", "--experiment", "example1", "--windows", path.to_str().unwrap()],
        &dir,
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn inconsistent_windows_exit_with_code_4() {
    // With a past window longer than the lag the stack is overdetermined and
    // fabricated outputs cannot be matched by any dictionary combination.
    let dir = temp_dir("inconsistent");
    let path = dir.join("windows.csv");
    let mut text = String::from("k,u_1,p_1,p_2,y_1\n");
    for k in 1..=9 {
        text.push_str(&format!("{k},0.1,0.5,0.25,{}\n", 3.0 + k as f64));
    }
    std::fs::write(&path, text).unwrap();
    let out = run(
        &[
            "simulate",
            "--experiment",
            "example1",
            "--nell",
            "4",
            "--windows",
            path.to_str().unwrap(),
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn infeasible_output_box_exits_with_code_5() {
    let dir = temp_dir("infeasible");
    let cfg_path = dir.join("tight.cfg");
    // From rest, the first predicted output is pinned near zero; an output
    // box excluding it cannot be met by any input.
    std::fs::write(
        &cfg_path,
        "[constraints]\nu_min = -0.000001\nu_max = 0.000001\ny_min = 0.5\ny_max = 1.0\n",
    )
    .unwrap();
    let out = run(
        &[
            "run",
            "--experiment",
            "example1",
            "--controller",
            "dpc",
            "--config",
            cfg_path.to_str().unwrap(),
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_reports_oracle_agreement() {
    let dir = temp_dir("simulate");
    let out = run(&["simulate", "--experiment", "example1", "--seed", "42"], &dir);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("max |y_hat - y_oracle|"), "{stdout}");
    let prediction = std::fs::read_to_string(dir.join("example1/prediction.csv")).unwrap();
    assert!(prediction.starts_with("k,y_hat,y_oracle\n"));
    assert_eq!(prediction.lines().count(), 6);
}

#[test]
fn run_single_controller_skips_comparison() {
    let dir = temp_dir("dpconly");
    let out = run(
        &["run", "--experiment", "example1", "--controller", "dpc", "--steps", "10"],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("example1/dpc_trajectory.csv").exists());
    assert!(!dir.join("example1/mpc_trajectory.csv").exists());
    let metrics = std::fs::read_to_string(dir.join("example1/metrics.txt")).unwrap();
    assert!(!metrics.contains("max_output_gap"));
}

#[test]
fn dump_qp_writes_matrix_archive() {
    let dir = temp_dir("dump");
    let out = run(
        &[
            "run",
            "--experiment",
            "example1",
            "--controller",
            "dpc",
            "--steps",
            "5",
            "--dump-qp",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["p.csv", "q.csv", "c0.csv", "a_eq.csv", "b_eq.csv", "a_in.csv", "lb.csv", "ub.csv"] {
        assert!(dir.join("example1/qp_dump").join(name).exists(), "missing {name}");
    }
    // The cost matrix of the benchmark problem is 42 x 42.
    let p = std::fs::read_to_string(dir.join("example1/qp_dump/p.csv")).unwrap();
    assert_eq!(p.lines().count(), 42);
    assert_eq!(p.lines().next().unwrap().split(',').count(), 42);
}

#[test]
fn config_file_changes_the_run() {
    let dir = temp_dir("config");
    let cfg_path = dir.join("exp.cfg");
    std::fs::write(
        &cfg_path,
        "[experiment]\nsteps = 12\n\n[reference]\nbreakpoints = 1:0.2\n",
    )
    .unwrap();
    let out = run(
        &[
            "run",
            "--experiment",
            "example1",
            "--controller",
            "both",
            "--config",
            cfg_path.to_str().unwrap(),
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("example1/dpc_trajectory.csv")).unwrap();
    // Header plus 12 steps.
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.lines().nth(1).unwrap().starts_with("1,0,0.2,"));
}
