use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ssf_core::genint::AlphaRule;
use ssf_lab::scenario::MAX_DIAGONAL_MATRIX;
use ssf_lab::{emit, load_scenario, parse_formats, run_scenario, LabError, PairSpec, Report, Scenario, SuiteKind};

#[derive(Parser)]
#[command(name = "ssf-lab", version, about = "Verification runs for accumulative matrix pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Directory for the emitted files.
    #[arg(long, default_value = "ssf-lab-out")]
    out: PathBuf,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, default_value = "csv,json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Run a built-in scenario.
    Example {
        #[command(subcommand)]
        which: Example,
    },
    /// Run a seeded random pair.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        /// Comma-separated suite names; all suites when absent.
        #[arg(long)]
        suites: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Re-emit tables or plots from a saved JSON summary.
    Report {
        json: PathBuf,
        #[arg(long)]
        format: String,
        #[arg(long, default_value = "ssf-lab-out")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Example {
    RankOne {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Diagonal series with the default couplings; series longer than the
    /// matrix limit only run the divergence study.
    Diagonal {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
}

fn parse_suites(list: &str) -> Result<Vec<SuiteKind>, LabError> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

fn configure_threads() -> Result<(), LabError> {
    let Ok(raw) = std::env::var("SSF_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| LabError::Validation(format!("SSF_LAB_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| LabError::Validation(format!("thread pool: {e}")))
}

fn print_report(report: &Report) {
    for s in &report.suites {
        let status = if s.passed { "PASS" } else { "FAIL" };
        println!("{status} {} ({} checks)", s.suite, s.checks.len());
        for c in s.checks.iter().filter(|c| !c.passed) {
            println!("    {} residual {:e} > tolerance {:e}", c.name, c.residual, c.tolerance);
        }
        if let Some(e) = &s.error {
            println!("    error: {e}");
        }
    }
    println!("{}: {}", report.scenario.name, if report.passed { "all suites passed" } else { "failures" });
}

fn execute(scenario: Scenario, output: &Output) -> Result<bool, LabError> {
    let formats = parse_formats(&output.format)?;
    let scenario = scenario.validate()?;
    let report = run_scenario(&scenario);
    print_report(&report);
    for path in emit(&report, &formats, &output.out)? {
        println!("wrote {}", path.display());
    }
    Ok(report.passed)
}

fn re_emit(json: &Path, format: &str, out: &Path) -> Result<bool, LabError> {
    let formats = parse_formats(format)?;
    let text = std::fs::read_to_string(json).map_err(|e| LabError::io(format!("reading {}", json.display()), e))?;
    let report = Report::from_json(&text)?;
    for path in emit(&report, &formats, out)? {
        println!("wrote {}", path.display());
    }
    Ok(true)
}

fn dispatch(cli: Cli) -> Result<bool, LabError> {
    configure_threads()?;
    match cli.command {
        Command::Run { file, output } => execute(load_scenario(&file)?, &output),
        Command::Example { which: Example::RankOne { alpha, output } } => {
            execute(Scenario::new(format!("rank-one-{alpha}"), PairSpec::RankOne { alpha }), &output)
        }
        Command::Example { which: Example::Diagonal { n, output } } => {
            let mut s = Scenario::new(format!("diagonal-{n}"), PairSpec::DiagonalSeries { rule: AlphaRule::default(), n });
            if n > MAX_DIAGONAL_MATRIX {
                s = s.with_suites(vec![SuiteKind::Divergence]);
            }
            execute(s, &output)
        }
        Command::Random { dim, seed, suites, output } => {
            let suites = suites.as_deref().map(parse_suites).transpose()?.unwrap_or_default();
            execute(Scenario::new(format!("random-{dim}-{seed}"), PairSpec::Random { dim, seed }).with_suites(suites), &output)
        }
        Command::Report { json, format, out } => re_emit(&json, &format, &out),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { 2 } else { 1 })
        }
    }
}
