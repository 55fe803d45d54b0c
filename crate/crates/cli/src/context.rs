use std::path::{Path, PathBuf};

use ancilla::io::{self, StrategyFile};
use ancilla::nonlocal::BellFunctional;
use ancilla::{CMatrix, CorrelationTable, FiniteFactorization, QuantumChannel, UnitaryMatrix, UnitaryTuple};
use serde_json::Value;

use crate::error::CliError;
use crate::report::{sha256_hex, ReportBuilder};

pub struct Context {
    pub tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Context {
    pub fn report(&self, command: &str) -> ReportBuilder {
        ReportBuilder::new(command, self.tol)
    }

    /// Write `value` to `--out` if given and record where it went.
    pub fn emit(&self, rb: &mut ReportBuilder, value: &Value) -> Result<(), CliError> {
        let Some(path) = &self.out else { return Ok(()) };
        write_text(path, value)?;
        let text = render(value);
        rb.result("output_sha256", sha256_hex(text.as_bytes()));
        Ok(())
    }
}

/// Canonical file text: pretty JSON with a trailing newline.
pub fn render(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn write_text(path: &Path, value: &Value) -> Result<(), CliError> {
    std::fs::write(path, render(value)).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn at(path: &Path, e: io::IoError) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

pub fn load_matrix(rb: &mut ReportBuilder, name: &str, path: &Path) -> Result<CMatrix, CliError> {
    let v = rb.input_file(name, path)?;
    io::matrix_from_json(&v, "").map_err(|e| at(path, e))
}

pub fn load_unitary(rb: &mut ReportBuilder, name: &str, path: &Path, tol: f64) -> Result<UnitaryMatrix, CliError> {
    let m = load_matrix(rb, name, path)?;
    UnitaryMatrix::new(m, tol).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn load_channel(rb: &mut ReportBuilder, name: &str, path: &Path) -> Result<QuantumChannel, CliError> {
    let v = rb.input_file(name, path)?;
    io::channel_from_json(&v).map_err(|e| at(path, e))
}

pub fn load_factorization(
    rb: &mut ReportBuilder,
    name: &str,
    path: &Path,
    tol: f64,
) -> Result<FiniteFactorization, CliError> {
    let v = rb.input_file(name, path)?;
    io::factorization_from_json(&v, tol).map_err(|e| at(path, e))
}

pub fn load_tuple(rb: &mut ReportBuilder, name: &str, path: &Path, tol: f64) -> Result<UnitaryTuple, CliError> {
    let v = rb.input_file(name, path)?;
    io::tuple_from_json(&v, tol).map_err(|e| at(path, e))
}

pub fn load_table(rb: &mut ReportBuilder, name: &str, path: &Path, tol: f64) -> Result<CorrelationTable, CliError> {
    let v = rb.input_file(name, path)?;
    io::table_from_json(&v, tol).map_err(|e| at(path, e))
}

pub fn load_functional(rb: &mut ReportBuilder, name: &str, path: &Path) -> Result<BellFunctional, CliError> {
    let v = rb.input_file(name, path)?;
    io::functional_from_json(&v).map_err(|e| at(path, e))
}

pub fn load_strategy(rb: &mut ReportBuilder, name: &str, path: &Path, tol: f64) -> Result<StrategyFile, CliError> {
    let v = rb.input_file(name, path)?;
    io::strategy_from_json(&v, tol).map_err(|e| at(path, e))
}
