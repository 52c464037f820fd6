use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use conelab::report::{self, CliError, Command, Mode, Report, RunConfig};
use conelab::volume::Body;

#[derive(Parser)]
#[command(name = "conelab", version, about = "Gauges, volumes and identity checks for cones of forms")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the exact identity suite at (n, 2k).
    Verify(Common),
    /// Gauge of a polynomial file with respect to a section.
    Gauge(Common),
    /// Normalized volume of a body by Monte Carlo.
    Volume(Common),
    /// Table of the explicit volume windows.
    Bounds(Common),
    /// Slope fits and polarity checks.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Slopes,
    Santalo,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConeArg {
    Ball,
    Nonneg,
    Sos,
    Linpowers,
    SosPolar,
    LinfBall,
}

impl From<ConeArg> for Body {
    fn from(c: ConeArg) -> Self {
        match c {
            ConeArg::Ball => Body::Ball,
            ConeArg::Nonneg => Body::Nonneg,
            ConeArg::Sos => Body::Sos,
            ConeArg::Linpowers => Body::Linpowers,
            ConeArg::SosPolar => Body::SosPolar,
            ConeArg::LinfBall => Body::LinfBall,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Number of variables (the smallest n for `experiment slopes`).
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Degree 2k.
    #[arg(long, default_value_t = 4)]
    deg: u32,
    /// Largest n for `experiment slopes`.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_enum)]
    cone: Option<ConeArg>,
    /// Monte Carlo samples; 0 uses the per-body default.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Initial direction count for the sums-of-powers bracket.
    #[arg(long, default_value_t = 0)]
    grid: usize,
    /// Polynomial file (JSON) for `gauge`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the result as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Run the config embedded in a report (or a bare config) instead of the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn build_config(command: Command, c: Common) -> Result<RunConfig, CliError> {
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path:?}: {e}")))?;
        let mut cfg = Report::config_from_json(&text).map_err(|e| CliError::Usage(format!("malformed config: {e}")))?;
        if cfg.command != command {
            return Err(CliError::Usage(format!(
                "config is for {:?}, not {command:?}",
                cfg.command
            )));
        }
        if c.out.is_some() {
            cfg.out = c.out;
        }
        if c.csv.is_some() {
            cfg.csv = c.csv;
        }
        return Ok(cfg);
    }
    Ok(RunConfig {
        command,
        n: c.n,
        two_k: c.deg,
        n_max: c.n_max,
        body: c.cone.map(Body::from),
        samples: c.samples,
        seed: c.seed,
        tol: c.tol,
        grid: c.grid,
        input: c.input,
        out: c.out,
        csv: c.csv,
        mode: match c.mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Numeric => Mode::Numeric,
        },
    })
}

fn execute(cli: Cli) -> Result<Report, CliError> {
    let (command, common) = match cli.command {
        Sub::Verify(c) => (Command::Verify, c),
        Sub::Gauge(c) => (Command::Gauge, c),
        Sub::Volume(c) => (Command::Volume, c),
        Sub::Bounds(c) => (Command::Bounds, c),
        Sub::Experiment { kind, common } => match kind {
            ExperimentKind::Slopes => (Command::Slopes, common),
            ExperimentKind::Santalo => (Command::Santalo, common),
        },
    };
    let config = build_config(command, common)?;
    let report = report::run(&config)?;
    let json = report.to_json();
    match &config.out {
        Some(path) => report::write_atomic(path, &json)?,
        None => print!("{json}"),
    }
    if let Some(path) = &config.csv {
        report::write_atomic(path, &report::to_csv(&report))?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match execute(cli) {
        Ok(report) => {
            for c in &report.checks {
                eprintln!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.anchor, c.detail);
            }
            if let Some(c) = report.first_failure() {
                eprintln!("first failing check: {}", c.anchor);
            }
            eprintln!("status {:?} in {:.2?}", report.status, start.elapsed());
            report.status.exit_code()
        }
        Err(e) => {
            eprintln!("conelab: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
