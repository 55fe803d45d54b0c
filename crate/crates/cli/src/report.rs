use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::IsTerminal;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Outcome of one command. Serialized with sorted keys and no timestamps,
/// so identical inputs give byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Inputs,
    pub results: BTreeMap<String, Value>,
    pub pass: bool,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Inputs {
    /// SHA-256 over the command name, `files` and `parameters`.
    pub digest: String,
    /// SHA-256 of each input file's bytes, keyed by argument name.
    pub files: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct ReportBuilder {
    command: String,
    inputs: Inputs,
    results: BTreeMap<String, Value>,
    checks: Vec<bool>,
    tolerances: BTreeMap<String, f64>,
}

impl ReportBuilder {
    pub fn new(command: &str, tol: f64) -> Self {
        let mut tolerances = BTreeMap::new();
        tolerances.insert("tol".to_string(), tol);
        Self {
            command: command.to_string(),
            inputs: Inputs::default(),
            results: BTreeMap::new(),
            checks: Vec::new(),
            tolerances,
        }
    }

    /// Read an input file, record its digest and return the parsed JSON.
    pub fn input_file(&mut self, name: &str, path: &Path) -> Result<Value, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.files.insert(name.to_string(), sha256_hex(&bytes));
        serde_json::from_slice(&bytes).map_err(|e| CliError::Usage(format!("{}: malformed JSON: {e}", path.display())))
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) {
        self.inputs.parameters.insert(name.to_string(), to_value(value));
    }

    pub fn result(&mut self, name: &str, value: impl Serialize) {
        self.results.insert(name.to_string(), to_value(value));
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }

    /// Record a boolean check; `pass` is the conjunction of all checks.
    pub fn check(&mut self, name: &str, ok: bool) {
        self.checks.push(ok);
        self.result(name, ok);
    }

    pub fn finish(mut self) -> RunReport {
        let canonical = serde_json::to_vec(&(&self.command, &self.inputs.files, &self.inputs.parameters))
            .expect("maps of JSON values serialize");
        self.inputs.digest = sha256_hex(&canonical);
        RunReport {
            command: self.command,
            inputs: self.inputs,
            results: self.results,
            pass: self.checks.iter().all(|&c| c),
            tolerances: self.tolerances,
        }
    }
}

fn to_value(v: impl Serialize) -> Value {
    // non-finite floats have no JSON form; they become null
    serde_json::to_value(v).unwrap_or(Value::Null)
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self, color: bool) -> String {
        let mut out = String::new();
        let verdict = match (self.pass, color) {
            (true, true) => "\x1b[32mPASS\x1b[0m",
            (false, true) => "\x1b[31mFAIL\x1b[0m",
            (true, false) => "PASS",
            (false, false) => "FAIL",
        };
        let _ = writeln!(out, "{}: {verdict}", self.command);
        for (k, v) in &self.results {
            let _ = writeln!(out, "  {k}: {}", compact(v));
        }
        let tols: Vec<String> = self.tolerances.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
        let _ = writeln!(out, "  tolerances: {}", tols.join(", "));
        let _ = writeln!(out, "  inputs: {}", &self.inputs.digest[..16]);
        out
    }
}

fn compact(v: &Value) -> String {
    let s = v.to_string();
    if s.chars().count() > 120 {
        s.chars().take(117).chain("...".chars()).collect()
    } else {
        s
    }
}

/// Color only on a terminal, and never when `NO_COLOR` is set to anything
/// non-empty.
pub fn use_color() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stdout().is_terminal()
}

/// JSON Schema for [`RunReport`] as emitted with `--json`.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");
