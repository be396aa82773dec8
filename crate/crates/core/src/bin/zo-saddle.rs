//! Command-line front end: configured solve sweeps, convergence-rate
//! fitting, and the statistical lemma-check suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use zo_saddle::config::ExperimentConfig;
use zo_saddle::error::Error;
use zo_saddle::metrics::{fit_rate, median};
use zo_saddle::restarts::restart_solve_auto;
use zo_saddle::solver::solve_from;
use zo_saddle::Real;

#[derive(Parser)]
#[command(name = "zo-saddle", version, about = "Gradient-free saddle-point solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured solve sweep; writes runs.csv and report.json
    Solve { config: PathBuf },
    /// Run a lemma-check suite (all | inner_product | smoothing |
    /// second_moment | bias | tails); writes lemma_checks.csv
    Verify {
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Fit convergence-rate exponents over a ladder; writes rates.csv
    Rate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { config } => cmd_solve(&config),
        Command::Verify { suite, seed } => cmd_verify(&suite, seed),
        Command::Rate { config } => cmd_rate(&config),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::ConfigError(_)
        | Error::DegenerateSeries(_)
        | Error::SeriesTooShort
        | Error::GrowthSpecMissing => 2,
        _ => 3,
    }
}

fn worker_count() -> usize {
    std::env::var("ZO_SADDLE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

#[derive(Debug, Clone)]
struct SweepPoint {
    run_id: usize,
    seed: u64,
    n: usize,
    delta: Option<Real>,
    d: Option<usize>,
}

fn sweep_points(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
    let d_axis: Vec<Option<usize>> = if cfg.sweep.d_grid.is_empty() {
        vec![None]
    } else {
        cfg.sweep.d_grid.iter().map(|&d| Some(d)).collect()
    };
    let delta_axis: Vec<Option<Real>> = if cfg.sweep.delta_grid.is_empty() {
        vec![None]
    } else {
        cfg.sweep.delta_grid.iter().map(|&d| Some(d)).collect()
    };
    let n_axis: Vec<usize> = if cfg.sweep.n_ladder.is_empty() {
        vec![cfg.solver.n_iters]
    } else {
        cfg.sweep.n_ladder.clone()
    };
    let seed_axis: Vec<u64> = if cfg.sweep.seeds.is_empty() {
        vec![cfg.solver.seed]
    } else {
        cfg.sweep.seeds.clone()
    };

    let mut points = Vec::new();
    let mut run_id = 0;
    for &d in &d_axis {
        for &delta in &delta_axis {
            for &n in &n_axis {
                for &seed in &seed_axis {
                    points.push(SweepPoint {
                        run_id,
                        seed,
                        n,
                        delta,
                        d,
                    });
                    run_id += 1;
                }
            }
        }
    }
    points
}

#[derive(Debug, Clone)]
struct RunRow {
    run_id: usize,
    seed: u64,
    n: usize,
    tau: Real,
    delta: Real,
    regime: String,
    final_gap: Option<Real>,
    wall_ms: u64,
    oracle_calls: u64,
}

fn execute_point(cfg: &ExperimentConfig, pt: &SweepPoint) -> Result<RunRow, Error> {
    let problem = cfg.problem.build(pt.d)?;
    let model = cfg.noise.build(problem.dim(), cfg.solver.tau, pt.delta)?;
    let setup_x = cfg.prox.setup_for(&problem.x_domain)?;
    let setup_y = problem
        .y_domain
        .as_ref()
        .map(|d| cfg.prox.setup_for(d))
        .transpose()?;
    let mut solver_cfg = cfg.solver.build(pt.n, pt.seed)?;
    // Δ-grid entries override the declared bound in the step rule too
    if let (Some(delta), zo_saddle::StepRule::Case1 { .. }) = (pt.delta, &solver_cfg.step_rule) {
        solver_cfg.step_rule = zo_saddle::StepRule::Case1 { delta_max: delta };
    }
    let report = solve_from(
        &problem,
        &model,
        &setup_x,
        setup_y.as_ref(),
        &solver_cfg,
        None,
        0,
    )?;
    Ok(RunRow {
        run_id: pt.run_id,
        seed: pt.seed,
        n: pt.n,
        tau: cfg.solver.tau,
        delta: pt.delta.unwrap_or_else(|| model.delta_max()),
        regime: cfg.solver.step_rule.clone(),
        final_gap: report.final_gap,
        wall_ms: if cfg.solver.record_timing {
            report.wall_ms
        } else {
            0
        },
        oracle_calls: report.oracle_calls,
    })
}

/// Run all sweep points on a bounded worker pool; rows come back in
/// config order regardless of scheduling.
fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<RunRow>, Error> {
    let points = sweep_points(cfg);
    let workers = worker_count().min(points.len().max(1));
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<Option<Result<RunRow, Error>>>> =
        Mutex::new((0..points.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    let i = *guard;
                    if i >= points.len() {
                        return;
                    }
                    *guard += 1;
                    i
                };
                let row = execute_point(cfg, &points[idx]);
                results.lock().unwrap()[idx] = Some(row);
            });
        }
    });

    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every sweep point executed"))
        .collect()
}

fn write_runs_csv(path: &Path, rows: &[RunRow]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "run_id",
        "seed",
        "N",
        "tau",
        "delta",
        "regime",
        "final_gap",
        "wall_ms",
        "oracle_calls",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.run_id.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            format!("{}", r.tau),
            format!("{}", r.delta),
            r.regime.clone(),
            r.final_gap.map_or(String::new(), |g| format!("{g}")),
            r.wall_ms.to_string(),
            r.oracle_calls.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::ConfigError(format!("csv: {other:?}")),
    }
}

fn cmd_solve(config_path: &Path) -> Result<u8, Error> {
    let cfg = ExperimentConfig::load(config_path)?;
    let rows = run_sweep(&cfg)?;

    let out_dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&out_dir)?;
    write_runs_csv(&out_dir.join("runs.csv"), &rows)?;

    let gaps: Vec<Real> = rows.iter().filter_map(|r| r.final_gap).collect();
    let report = serde_json::json!({
        "config_hash": format!("{:016x}", cfg.hash()),
        "n_runs": rows.len(),
        "median_final_gap": if gaps.is_empty() {
            serde_json::Value::Null
        } else {
            serde_json::json!(median(&gaps))
        },
        "total_oracle_calls": rows.iter().map(|r| r.oracle_calls).sum::<u64>(),
    });
    std::fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;
    println!(
        "wrote {} run(s) to {}",
        rows.len(),
        out_dir.join("runs.csv").display()
    );
    Ok(0)
}

fn cmd_verify(suite: &str, seed: u64) -> Result<u8, Error> {
    let reports = zo_saddle::verify::run_suite(suite, seed)?;
    let mut w = csv::Writer::from_path("lemma_checks.csv").map_err(csv_err)?;
    w.write_record([
        "lemma_id",
        "n_samples",
        "statistic",
        "bound",
        "margin",
        "pass",
        "seed",
    ])
    .map_err(csv_err)?;
    let mut all_pass = true;
    for r in &reports {
        w.write_record([
            r.lemma_id.clone(),
            r.n_samples.to_string(),
            format!("{}", r.statistic),
            format!("{}", r.bound),
            format!("{}", r.margin),
            r.pass.to_string(),
            r.seed.to_string(),
        ])
        .map_err(csv_err)?;
        println!(
            "{} {:<22} statistic={:.6e} bound={:.6e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.lemma_id,
            r.statistic,
            r.bound
        );
        all_pass &= r.pass;
    }
    w.flush()?;
    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_rate(config_path: &Path) -> Result<u8, Error> {
    let cfg = ExperimentConfig::load(config_path)?;
    let out_dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("rates.csv")).map_err(csv_err)?;
    w.write_record(["ladder", "x", "y"]).map_err(csv_err)?;

    match cfg.rate.kind.as_str() {
        "iterations" => {
            if cfg.sweep.n_ladder.len() < 3 {
                return Err(Error::ConfigError(
                    "rate fitting needs sweep.n_ladder with at least 3 points".into(),
                ));
            }
            let seeds: Vec<u64> = if cfg.sweep.seeds.is_empty() {
                vec![cfg.solver.seed]
            } else {
                cfg.sweep.seeds.clone()
            };
            let mut points = Vec::new();
            for &n in &cfg.sweep.n_ladder {
                let mut gaps = Vec::new();
                for &seed in &seeds {
                    let pt = SweepPoint {
                        run_id: 0,
                        seed,
                        n,
                        delta: None,
                        d: None,
                    };
                    let row = execute_point(&cfg, &pt)?;
                    gaps.push(row.final_gap.ok_or(Error::NoGapOracle)?);
                }
                let gap = median(&gaps);
                w.write_record(["n".into(), n.to_string(), format!("{gap}")])
                    .map_err(csv_err)?;
                points.push((n as Real, gap));
            }
            let fit = fit_rate(&points)?;
            println!(
                "gap ~ N^s: fitted exponent s = {:.4} (r² = {:.4})",
                fit.slope, fit.r_squared
            );
        }
        "restart_eps" => {
            if cfg.rate.eps_ladder.len() < 3 {
                return Err(Error::ConfigError(
                    "rate fitting needs rate.eps_ladder with at least 3 points".into(),
                ));
            }
            let problem = cfg.problem.build(None)?;
            let model = cfg.noise.build(problem.dim(), cfg.solver.tau, None)?;
            let setup_x = cfg.prox.setup_for(&problem.x_domain)?;
            let setup_y = problem
                .y_domain
                .as_ref()
                .map(|d| cfg.prox.setup_for(d))
                .transpose()?;
            let base = cfg.solver.build(cfg.solver.n_iters, cfg.solver.seed)?;
            let mut points = Vec::new();
            for &eps in &cfg.rate.eps_ladder {
                let rep = restart_solve_auto(
                    &problem,
                    &model,
                    &setup_x,
                    setup_y.as_ref(),
                    &base,
                    eps,
                    None,
                )?;
                let total = rep.n_iters as Real;
                w.write_record(["eps".into(), format!("{eps}"), format!("{total}")])
                    .map_err(csv_err)?;
                points.push((1.0 / eps, total));
            }
            let fit = fit_rate(&points)?;
            println!(
                "total budget ~ (1/eps)^s: fitted exponent s = {:.4} (r² = {:.4})",
                fit.slope, fit.r_squared
            );
        }
        other => {
            return Err(Error::ConfigError(format!("unknown rate kind '{other}'")));
        }
    }
    w.flush()?;
    Ok(0)
}
