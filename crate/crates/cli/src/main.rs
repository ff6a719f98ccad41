use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dflat_cli::config::{CaseId, Format, RunConfig, VerifyArgs};
use dflat_cli::tables::{eta_document, phi_table};
use dflat_cli::{exit, suites, CliError};
use dflat_core::phi::KParams;

#[derive(Debug, Parser)]
#[command(name = "dflat", version, about = "Numerical checks for dually flat (α, β)-metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one verification suite and emit a report.
    Verify(VerifyArgs),
    /// Tabulate the φ solving the profile equation for (k1, k2, k3, ε).
    SolvePhi(SolvePhiArgs),
    /// Compare the closed forms of η with quadrature across all cases.
    ReportEta(ReportEtaArgs),
    /// List the available verification cases.
    ListCases,
}

#[derive(Debug, Args)]
struct SolvePhiArgs {
    #[arg(long, allow_negative_numbers = true)]
    k1: f64,
    #[arg(long, allow_negative_numbers = true)]
    k2: f64,
    #[arg(long, allow_negative_numbers = true)]
    k3: f64,
    #[arg(long, allow_negative_numbers = true)]
    eps: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportEtaArgs {
    #[arg(long, default_value_t = 21)]
    points: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn verify(a: &VerifyArgs) -> Result<bool, CliError> {
    let cfg = RunConfig::from_args(a)?;
    let report = suites::run(&cfg)?;
    let mut out = sink(&a.output)?;
    match cfg.format {
        Format::Json => report.write_json(&mut out)?,
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()?;
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    Ok(report.pass)
}

fn solve(a: &SolvePhiArgs) -> Result<bool, CliError> {
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(CliError::Config(format!("--tol must be positive, got {}", a.tol)));
    }
    let table = phi_table(KParams::new(a.k1, a.k2, a.k3, a.eps)?, a.points)?;
    if let Some(w) = &table.warning {
        eprintln!("warning: {w}");
    }
    let mut out = sink(&a.output)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    let (lo, hi) = table.domain;
    eprintln!("domain [{lo}, {hi}], max residual {:e}", table.max_residual());
    Ok(table.passes(a.tol))
}

fn eta(a: &ReportEtaArgs) -> Result<bool, CliError> {
    let doc = eta_document(a.points, a.tol)?;
    let mut out = sink(&a.output)?;
    match a.format {
        Format::Json => doc.write_json(&mut out)?,
        Format::Csv => doc.write_csv(&mut out)?,
    }
    out.flush()?;
    for c in &doc.report.flagged_cases {
        eprintln!("flagged: closed form for {c:?} disagrees with quadrature");
    }
    Ok(doc.report.corrected_pass)
}

fn list() -> Result<bool, CliError> {
    let mut out = io::stdout().lock();
    for c in CaseId::value_variants() {
        let id = c.to_possible_value().expect("no skipped variants");
        writeln!(out, "{:<20} {}", id.get_name(), c.describe())?;
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::PASS });
        }
    };
    let result = match &cli.command {
        Command::Verify(a) => verify(a),
        Command::SolvePhi(a) => solve(a),
        Command::ReportEta(a) => eta(a),
        Command::ListCases => list(),
    };
    match result {
        Ok(true) => ExitCode::from(exit::PASS),
        Ok(false) => ExitCode::from(exit::FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::USAGE)
        }
    }
}
