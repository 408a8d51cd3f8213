//! `wavestab`: gain checks, simulations, sweeps and the inequality suite.
//!
//! Exit codes: 0 ok, 1 hypotheses unsatisfied or inequality violated,
//! 2 usage/config/IO error, 3 numerical blow-up.

mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use wavestab::grid::{BoundaryCondition, Grid1D};
use wavestab::inequalities::{run_inequality_suite, SuiteConfig};

const EXIT_OK: u8 = 0;
const EXIT_UNSATISFIED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;

#[derive(Parser)]
#[command(name = "wavestab", version, about = "Feedback stabilization experiments for damped wave equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the gain conditions for a configuration and print them as JSON.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate a configuration, writing trajectory.csv and report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a configuration over a list of `mu` or `n` values, writing summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Sample the functional inequalities, writing lemmas.json.
    Lemmas {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn cmd_check(path: &Path) -> Result<u8, Failure> {
    let cfg = load(path)?;
    let report = report::gain_report(&cfg).map_err(|e| usage(e.to_string()))?;
    let Some(report) = report else {
        return Err(usage(format!(
            "no gain condition is available for family '{}' with controller '{}'",
            cfg.model.family,
            cfg.controller_spec().map(|c| c.name()).unwrap_or("?")
        )));
    };
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    print!("{}", to_json(&report));
    Ok(if report.satisfied { EXIT_OK } else { EXIT_UNSATISFIED })
}

fn cmd_run(path: &Path, out: &Path) -> Result<u8, Failure> {
    let cfg = load(path)?;
    prepare_out(out)?;
    let outcome = report::simulate(&cfg).map_err(|e| usage(e.to_string()))?;
    write(&out.join("trajectory.csv"), &report::trajectory_csv(&outcome.trajectory.records))?;
    write(&out.join("report.json"), &to_json(&outcome.report))?;
    let r = &outcome.report;
    match r.blow_up {
        Some(t) => {
            eprintln!("blow-up at t = {t}");
            Ok(EXIT_BLOW_UP)
        }
        None => {
            let rate = r.fit.and_then(|f| f.rate()).map_or("n/a".to_string(), |x| format!("{x:.6}"));
            println!("records: {}, fitted rate: {rate}, verified: {}", r.records, r.verified);
            Ok(EXIT_OK)
        }
    }
}

fn parse_values(values: &str) -> Result<Vec<f64>, Failure> {
    if values.trim().is_empty() {
        return Ok(Vec::new());
    }
    values
        .split(',')
        .map(|v| config::parse_real(v).ok_or_else(|| usage(format!("invalid sweep value '{}'", v.trim()))))
        .collect()
}

fn cmd_sweep(path: &Path, param: &str, values: &str, out: &Path, jobs: usize) -> Result<u8, Failure> {
    let base = load(path)?;
    let mut values = parse_values(values)?;
    values.sort_by(f64::total_cmp);
    let configs: Vec<ExperimentConfig> = values
        .iter()
        .map(|&v| base.with_param(param, v).map_err(|e| usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    prepare_out(out)?;

    let rows: Mutex<Vec<Option<report::SweepRow>>> = Mutex::new(vec![None; configs.len()]);
    let next = AtomicUsize::new(0);
    let first_error: Mutex<Option<String>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(configs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                match report::sweep_row(values[i], &configs[i]) {
                    Ok(row) => rows.lock().unwrap()[i] = Some(row),
                    Err(e) => {
                        first_error.lock().unwrap().get_or_insert(e.to_string());
                    }
                }
            });
        }
    });
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(usage(e));
    }
    let rows: Vec<report::SweepRow> = rows.into_inner().unwrap().into_iter().map(|r| r.expect("every run finished")).collect();
    write(&out.join("summary.csv"), &report::summary_csv(&rows))?;
    for row in &rows {
        println!("{param} = {}: satisfied {}, verified {}", row.value, row.gain_satisfied, row.verified);
    }
    Ok(EXIT_OK)
}

fn cmd_lemmas(seed: u64, samples: usize, out: &Path) -> Result<u8, Failure> {
    let grid = Grid1D::new(1.0, 1024, BoundaryCondition::Neumann).expect("valid grid");
    let reports = run_inequality_suite(seed, samples, &grid, &SuiteConfig::default()).map_err(|e| usage(e.to_string()))?;
    prepare_out(out)?;
    write(&out.join("lemmas.json"), &to_json(&reports))?;
    let mut failed = false;
    for r in &reports {
        let status = match (r.passed(), r.informational) {
            (true, _) => "ok",
            (false, true) => "violated (informational)",
            (false, false) => {
                failed = true;
                "VIOLATED"
            }
        };
        println!(
            "{:<13} {}/{} violations, best constant {:.6} (stated {:.6}) {status}",
            r.name, r.violations, r.samples, r.empirical_best_constant, r.stated_constant
        );
    }
    Ok(if failed { EXIT_UNSATISFIED } else { EXIT_OK })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { config } => cmd_check(config),
        Command::Run { config, out } => cmd_run(config, out),
        Command::Sweep { config, param, values, out, jobs } => cmd_sweep(config, param, values, out, *jobs),
        Command::Lemmas { seed, samples, out } => cmd_lemmas(*seed, *samples, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
