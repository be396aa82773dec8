//! Smoke tests for the command-line front end: output files, sweep
//! semantics, exit codes, and worker-count independence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_zo-saddle")
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args).current_dir(dir);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn solve_minimal_config_writes_one_row() {
    let dir = tmp("cli-minimal");
    let cfg = write_config(
        &dir,
        "cfg.toml",
        r#"
[problem]
kind = "matching_pennies"

[solver]
n_iters = 100
tau = 0.05

[output]
dir = "out"
"#,
    );
    let out = run_in(&dir, &["solve", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));

    let rows = csv_rows(&dir.join("out/runs.csv"));
    assert_eq!(rows.len(), 1);
    // final_gap populated and finite
    let gap: f64 = rows[0][6].parse().unwrap();
    assert!(gap.is_finite() && gap >= 0.0);
    // report.json carries the provenance hash
    let report = std::fs::read_to_string(dir.join("out/report.json")).unwrap();
    assert!(report.contains("config_hash"));
}

#[test]
fn solve_sweep_over_three_seeds() {
    let dir = tmp("cli-seeds");
    let cfg = write_config(
        &dir,
        "cfg.toml",
        r#"
[problem]
kind = "matching_pennies"

[solver]
n_iters = 50
tau = 0.05

[sweep]
seeds = [5, 6, 7]

[output]
dir = "out"
"#,
    );
    let out = run_in(&dir, &["solve", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.join("out/runs.csv"));
    assert_eq!(rows.len(), 3);
    let seeds: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(seeds, ["5", "6", "7"]);
}

#[test]
fn invalid_key_exits_2_and_names_the_key() {
    let dir = tmp("cli-badkey");
    let cfg = write_config(
        &dir,
        "cfg.toml",
        r#"
[problem]
kind = "matching_pennies"

[solver]
n_iters = 100
taux = 0.05
"#,
    );
    let out = run_in(&dir, &["solve", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("taux"), "stderr should name the key: {stderr}");
}

#[test]
fn verify_suite_passes_and_writes_reports() {
    let dir = tmp("cli-verify");
    let out = run_in(&dir, &["verify", "inner_product", "--seed", "7"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.join("lemma_checks.csv"));
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[5] == "true"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS"));
}

#[test]
fn unknown_suite_exits_2() {
    let dir = tmp("cli-badsuite");
    let out = run_in(&dir, &["verify", "nosuch"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rate_iterations_fits_inverse_sqrt() {
    let dir = tmp("cli-rate");
    let cfg = write_config(
        &dir,
        "cfg.toml",
        r#"
[problem]
kind = "matrix_game"
dx = 4
dy = 4
matrix_seed = 3

[solver]
n_iters = 100
tau = 0.05

[sweep]
n_ladder = [100, 1000, 10000]
seeds = [0, 1, 2, 3, 4]

[rate]
kind = "iterations"

[output]
dir = "out"
"#,
    );
    let out = run_in(&dir, &["rate", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("fitted exponent"), "{stdout}");
    let slope: f64 = stdout
        .split("s = ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (-0.65..=-0.35).contains(&slope),
        "noiseless slope {slope} outside [-0.65, -0.35]"
    );
    let rows = csv_rows(&dir.join("out/rates.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "n"));
}

#[test]
fn rate_restart_ladder_runs() {
    let dir = tmp("cli-rate-restart");
    let cfg = write_config(
        &dir,
        "cfg.toml",
        r#"
[problem]
kind = "strongly_monotone_ball"
dx = 1
dy = 1
mu = 1.0

[solver]
n_iters = 100
tau = 0.01

[rate]
kind = "restart_eps"
eps_ladder = [0.2, 0.1, 0.05]

[output]
dir = "out"
"#,
    );
    let out = run_in(&dir, &["rate", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.join("out/rates.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "eps"));
}

#[test]
fn rate_single_point_ladder_exits_2() {
    let dir = tmp("cli-rate-short");
    let cfg = write_config(
        &dir,
        "cfg.toml",
        r#"
[problem]
kind = "matching_pennies"

[solver]
n_iters = 100
tau = 0.05

[sweep]
n_ladder = [100]

[rate]
kind = "iterations"
"#,
    );
    let out = run_in(&dir, &["rate", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tmp("cli-threads");
    let body = r#"
[problem]
kind = "matching_pennies"

[solver]
n_iters = 200
tau = 0.05

[sweep]
n_ladder = [50, 200]
seeds = [1, 2, 3]

[output]
dir = "OUTDIR"
"#;
    let mut outputs = Vec::new();
    for (threads, out_name) in [("1", "out-1"), ("4", "out-4")] {
        let cfg = write_config(&dir, &format!("cfg-{threads}.toml"), &body.replace("OUTDIR", out_name));
        let out = run_in(
            &dir,
            &["solve", cfg.to_str().unwrap()],
            &[("ZO_SADDLE_THREADS", threads)],
        );
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read(dir.join(out_name).join("runs.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "runs.csv differs across worker counts");
}
