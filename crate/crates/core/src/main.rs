use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tlrisk::analytic::solve_fixed_point;
use tlrisk::harness::config::read_matrix_file;
use tlrisk::harness::csv::{emit_csv, read_csv};
use tlrisk::harness::svg::emit_svg;
use tlrisk::harness::{analytic_table, compare, run_sweep, ExperimentConfig};
use tlrisk::linalg::Matrix;
use tlrisk::operators::{build_operator, resolution_consistency_check, OperatorKind, OperatorSpec};
use tlrisk::Error;

#[derive(Parser)]
#[command(
    name = "tlrisk",
    version,
    about = "Risk curves for transfer learning in linear regression"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo sweep with analytic overlay; writes risk.csv and SVG plots.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Formula-only curves, no sampling; writes analytic.csv and SVG plots.
    Analytic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Checks each row of a sweep CSV: |empirical - analytic| <= k * stderr.
    Compare {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        sigmas: f64,
        /// Number of worst rows to list.
        #[arg(long, default_value_t = 5)]
        worst: usize,
    },
    /// Solves the resolvent fixed point for W and prints c, c' and the residual.
    FixedPoint {
        /// Matrix file, or `identity` (size from --d).
        #[arg(long)]
        w: String,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 64)]
        d: usize,
    },
    /// Builds an operator and reports its normalization.
    Operator {
        /// identity | dct | circ:w=<width>
        #[arg(long)]
        spec: String,
        #[arg(long)]
        d: usize,
        /// Also check the normalization at d, 2d and 4d.
        #[arg(long)]
        check: bool,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
    CompareFail,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn prepare_out(dir: &PathBuf) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Sweep { config, out, workers } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            prepare_out(&out)?;
            let res = run_sweep(&cfg, workers.unwrap_or_else(default_workers))?;
            let csv = out.join("risk.csv");
            emit_csv(&res.points, &csv)?;
            let svgs = emit_svg(&res.points, &out, cfg.log_x)?;
            println!("{} points -> {}", res.points.len(), csv.display());
            for p in svgs {
                println!("plot -> {}", p.display());
            }
        }
        Cmd::Analytic { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            prepare_out(&out)?;
            let points = analytic_table(&cfg)?;
            let csv = out.join("analytic.csv");
            emit_csv(&points, &csv)?;
            let svgs = emit_svg(&points, &out, cfg.log_x)?;
            println!("{} points -> {}", points.len(), csv.display());
            for p in svgs {
                println!("plot -> {}", p.display());
            }
        }
        Cmd::Compare { csv, sigmas, worst } => {
            if sigmas.is_nan() || sigmas < 0.0 {
                return Err(Failure::Usage("--sigmas must be >= 0".into()));
            }
            let points = read_csv(&csv)?;
            let report = compare(&points, sigmas);
            print!("{}", report.summary(worst));
            if !report.ok() {
                return Err(Failure::CompareFail);
            }
        }
        Cmd::FixedPoint { w, gamma, alpha, d } => {
            let m = if w == "identity" {
                Matrix::identity(d, d)
            } else {
                read_matrix_file(&PathBuf::from(&w))?
            };
            let sol = solve_fixed_point(&m, gamma, alpha)?;
            println!("c = {:.17e}", sol.c);
            println!("c' = {:.17e}", sol.c_prime);
            println!("residual = {:.3e}", sol.residual);
            println!("iterations = {}", sol.iterations);
        }
        Cmd::Operator { spec, d, check } => {
            let kind: OperatorKind = spec.parse()?;
            let op = build_operator(OperatorSpec { kind, d })?;
            println!("operator {kind} d = {d}");
            println!("kappa_H = {:.17}", op.kappa_h);
            println!("min singular value = {:.6e}", op.min_singular_value);
            if check {
                let report = resolution_consistency_check(kind, &[d, 2 * d, 4 * d])?;
                for (dd, k) in &report.kappas {
                    println!("  d = {dd:<6} kappa_H = {k:.17}");
                }
                println!("resolution check: {}", if report.passed { "PASS" } else { "FAIL" });
                if !report.passed {
                    return Err(Failure::Numerical("kappa_H drifts across resolutions".into()));
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
        Err(Failure::CompareFail) => ExitCode::from(3),
    }
}
