//! `ancilla`: verify and construct channels, factorizations, correlation
//! matrices and nonlocal-game tables from JSON files.
//!
//! Exit codes: 0 pass, 1 verification failed, 2 usage or input error,
//! 3 numerical failure.

mod chan;
mod context;
mod corr;
mod error;
mod fact;
mod game;
mod report;
mod zoo;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use context::Context;
use error::CliError;
use report::RunReport;

#[derive(Debug, Parser)]
#[command(
    name = "ancilla",
    version,
    about = "Quantum channels, factorizations and correlation sets"
)]
struct Cli {
    /// Numerical tolerance for all checks.
    #[arg(long, global = true, default_value_t = ancilla::DEFAULT_TOL)]
    tol: f64,
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Where to write the object the command produces (channel, matrix, ...).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    group: Group,
}

#[derive(Debug, Subcommand)]
enum Group {
    /// Kraus/Choi calculus.
    #[command(subcommand)]
    Chan(chan::Command),
    /// Named channels and random unitaries.
    #[command(subcommand)]
    Zoo(zoo::Command),
    /// Factorizable channels.
    #[command(subcommand)]
    Fact(fact::Command),
    /// Gram matrices of unitary tuples.
    #[command(subcommand)]
    Corr(corr::Command),
    /// Nonlocal games and correlation tables.
    #[command(subcommand)]
    Game(game::Command),
    /// Print the JSON Schema that `--json` reports conform to.
    ReportSchema,
}

fn run(cli: Cli) -> Result<Option<RunReport>, CliError> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    let ctx = Context {
        tol: cli.tol,
        seed: cli.seed,
        out: cli.out,
    };
    let report = match cli.group {
        Group::Chan(c) => chan::run(c, &ctx)?,
        Group::Zoo(c) => zoo::run(c, &ctx)?,
        Group::Fact(c) => fact::run(c, &ctx)?,
        Group::Corr(c) => corr::run(c, &ctx)?,
        Group::Game(c) => game::run(c, &ctx)?,
        Group::ReportSchema => {
            print!("{}", report::REPORT_SCHEMA);
            return Ok(None);
        }
    };
    Ok(Some(report))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(report)) => {
            let text = if json {
                report.to_json()
            } else {
                report.to_text(report::use_color())
            };
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
