//! JSON (UTF-8) file formats.
//!
//! ```text
//! matrix        {"rows":n,"cols":m,"re":[[..]],"im":[[..]]}
//! channel       {"dim":n,"kraus":[matrix,..]}
//! factorization {"dim":n,"blocks":[k_j,..],"weights":[t_j,..],"unitaries":[matrix(n·k_j),..]}
//! tuple         {"n":n,"blocks":[..],"weights":[..],"unitaries":[[matrix per i] per block]}
//! table         {"n":n,"k":k,"p":[[[[..]]]]}            indexed [x][y][a][b]
//! functional    {"n":n,"k":k,"coefficients":[[[[..]]]]} indexed [x][y][a][b]
//! strategy      {"kind":"tensor","dimA":..,"dimB":..,"alice":[[matrix per a] per x],"bob":..,"psi":{"re":[..],"im":[..]}}
//!               {"kind":"commuting","dim":..,"alice":..,"bob":..,"psi":..}
//! ```
//!
//! Any weight may be written as `{"num":1,"den":3}`. Decoding errors carry a
//! JSON-pointer path to the offending value. Writers emit shortest
//! round-trip float representations, so decoding a written file reproduces
//! it bit for bit.

use std::path::Path;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::channel::QuantumChannel;
use crate::correlations::UnitaryTuple;
use crate::error::Error;
use crate::factorization::{FiniteAncillaSpec, FiniteFactorization, Weight};
use crate::linalg::{c, CMatrix, CVector};
use crate::nonlocal::{BellFunctional, CommutingStrategy, CorrelationTable, Pvm, TensorStrategy};
use crate::zoo::{check_weights, UnitaryMatrix};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn schema(path: &str, message: impl Into<String>) -> IoError {
    IoError::Schema {
        path: if path.is_empty() { "/".into() } else { path.into() },
        message: message.into(),
    }
}

fn at(path: &str, key: impl std::fmt::Display) -> String {
    format!("{path}/{key}")
}

fn model(path: &str, e: Error) -> IoError {
    schema(path, e.to_string())
}

fn object<'a>(v: &'a Value, path: &str) -> IoResult<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> IoResult<&'a Value> {
    obj.get(key)
        .ok_or_else(|| schema(path, format!("missing field \"{key}\"")))
}

fn array<'a>(v: &'a Value, path: &str) -> IoResult<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn number(v: &Value, path: &str) -> IoResult<f64> {
    v.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn positive_int(v: &Value, path: &str) -> IoResult<usize> {
    match v.as_u64() {
        Some(x) if x > 0 => Ok(x as usize),
        _ => Err(schema(path, "expected a positive integer")),
    }
}

fn usize_field(obj: &Map<String, Value>, key: &str, path: &str) -> IoResult<usize> {
    positive_int(field(obj, key, path)?, &at(path, key))
}

/// A number or `{"num": p, "den": q}`.
pub fn weight_from_json(v: &Value, path: &str) -> IoResult<Weight> {
    if let Some(obj) = v.as_object() {
        let num = field(obj, "num", path)?
            .as_u64()
            .ok_or_else(|| schema(&at(path, "num"), "expected a nonnegative integer"))?;
        let den = field(obj, "den", path)?
            .as_u64()
            .ok_or_else(|| schema(&at(path, "den"), "expected a positive integer"))?;
        return Weight::exact(num, den).map_err(|e| model(&at(path, "den"), e));
    }
    Ok(Weight::Float(number(v, path)?))
}

pub fn weight_to_json(w: &Weight) -> Value {
    match *w {
        Weight::Exact { num, den } => json!({"num": num, "den": den}),
        Weight::Float(t) => json!(t),
    }
}

/// Parse `"1/3"` or `"0.25"`.
pub fn parse_weight(s: &str) -> std::result::Result<Weight, String> {
    if let Some((n, d)) = s.split_once('/') {
        let num = n.trim().parse::<u64>().map_err(|e| format!("bad numerator: {e}"))?;
        let den = d.trim().parse::<u64>().map_err(|e| format!("bad denominator: {e}"))?;
        Weight::exact(num, den).map_err(|e| e.to_string())
    } else {
        s.trim()
            .parse::<f64>()
            .map(Weight::Float)
            .map_err(|e| format!("bad weight: {e}"))
    }
}

fn weights_from_json(v: &Value, path: &str, tol: f64) -> IoResult<Vec<f64>> {
    let ws = array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, w)| weight_from_json(w, &at(path, i)).map(|w| w.value()))
        .collect::<IoResult<Vec<_>>>()?;
    check_weights(&ws, tol).map_err(|e| model(path, e))?;
    Ok(ws)
}

fn real_grid(v: &Value, rows: usize, cols: usize, path: &str) -> IoResult<Vec<f64>> {
    let rs = array(v, path)?;
    if rs.len() != rows {
        return Err(schema(path, format!("expected {rows} rows, found {}", rs.len())));
    }
    let mut out = Vec::with_capacity(rows * cols);
    for (i, r) in rs.iter().enumerate() {
        let rp = at(path, i);
        let cs = array(r, &rp)?;
        if cs.len() != cols {
            return Err(schema(&rp, format!("expected {cols} columns, found {}", cs.len())));
        }
        for (j, x) in cs.iter().enumerate() {
            out.push(number(x, &at(&rp, j))?);
        }
    }
    Ok(out)
}

pub fn matrix_from_json(v: &Value, path: &str) -> IoResult<CMatrix> {
    let obj = object(v, path)?;
    let rows = usize_field(obj, "rows", path)?;
    let cols = usize_field(obj, "cols", path)?;
    let re = real_grid(field(obj, "re", path)?, rows, cols, &at(path, "re"))?;
    let im = real_grid(field(obj, "im", path)?, rows, cols, &at(path, "im"))?;
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        c(re[i * cols + j], im[i * cols + j])
    }))
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    let grid = |f: &dyn Fn(usize, usize) -> f64| -> Value {
        Value::Array(
            (0..m.nrows())
                .map(|i| Value::Array((0..m.ncols()).map(|j| json!(f(i, j))).collect()))
                .collect(),
        )
    };
    json!({
        "rows": m.nrows(),
        "cols": m.ncols(),
        "re": grid(&|i, j| m[(i, j)].re),
        "im": grid(&|i, j| m[(i, j)].im),
    })
}

fn square_matrix(v: &Value, dim: usize, path: &str) -> IoResult<CMatrix> {
    let m = matrix_from_json(v, path)?;
    if m.shape() != (dim, dim) {
        return Err(schema(
            path,
            format!("expected a {dim}x{dim} matrix, found {}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(m)
}

fn unitary(v: &Value, dim: usize, path: &str, tol: f64) -> IoResult<UnitaryMatrix> {
    UnitaryMatrix::new(square_matrix(v, dim, path)?, tol).map_err(|e| model(path, e))
}

pub fn channel_from_json(v: &Value) -> IoResult<QuantumChannel> {
    let obj = object(v, "")?;
    let dim = usize_field(obj, "dim", "")?;
    let kraus = array(field(obj, "kraus", "")?, "/kraus")?
        .iter()
        .enumerate()
        .map(|(i, m)| square_matrix(m, dim, &at("/kraus", i)))
        .collect::<IoResult<Vec<_>>>()?;
    QuantumChannel::new(dim, kraus).map_err(|e| model("/kraus", e))
}

pub fn channel_to_json(ch: &QuantumChannel) -> Value {
    json!({
        "dim": ch.dim(),
        "kraus": ch.kraus().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

fn blocks_from_json(obj: &Map<String, Value>) -> IoResult<Vec<usize>> {
    let blocks = array(field(obj, "blocks", "")?, "/blocks")?
        .iter()
        .enumerate()
        .map(|(i, k)| positive_int(k, &at("/blocks", i)))
        .collect::<IoResult<Vec<_>>>()?;
    if blocks.is_empty() {
        return Err(schema("/blocks", "at least one block is required"));
    }
    Ok(blocks)
}

fn ancilla_from_json(obj: &Map<String, Value>, tol: f64) -> IoResult<FiniteAncillaSpec> {
    let blocks = blocks_from_json(obj)?;
    let weights = weights_from_json(field(obj, "weights", "")?, "/weights", tol)?;
    if weights.len() != blocks.len() {
        return Err(schema(
            "/weights",
            format!("{} weights for {} blocks", weights.len(), blocks.len()),
        ));
    }
    FiniteAncillaSpec::new(blocks, weights, tol).map_err(|e| model("/weights", e))
}

pub fn factorization_from_json(v: &Value, tol: f64) -> IoResult<FiniteFactorization> {
    let obj = object(v, "")?;
    let dim = usize_field(obj, "dim", "")?;
    let ancilla = ancilla_from_json(obj, tol)?;
    let us = array(field(obj, "unitaries", "")?, "/unitaries")?;
    if us.len() != ancilla.len() {
        return Err(schema(
            "/unitaries",
            format!("{} unitaries for {} blocks", us.len(), ancilla.len()),
        ));
    }
    let unitaries = us
        .iter()
        .zip(ancilla.blocks())
        .enumerate()
        .map(|(j, (u, &k))| unitary(u, dim * k, &at("/unitaries", j), tol))
        .collect::<IoResult<Vec<_>>>()?;
    FiniteFactorization::new(dim, ancilla, unitaries).map_err(|e| model("", e))
}

pub fn factorization_to_json(f: &FiniteFactorization) -> Value {
    json!({
        "dim": f.dim(),
        "blocks": f.ancilla().blocks(),
        "weights": f.ancilla().weights(),
        "unitaries": f.unitaries().iter().map(|u| matrix_to_json(u.matrix())).collect::<Vec<_>>(),
    })
}

pub fn tuple_from_json(v: &Value, tol: f64) -> IoResult<UnitaryTuple> {
    let obj = object(v, "")?;
    let n = usize_field(obj, "n", "")?;
    let ancilla = ancilla_from_json(obj, tol)?;
    let per_block = array(field(obj, "unitaries", "")?, "/unitaries")?;
    if per_block.len() != ancilla.len() {
        return Err(schema(
            "/unitaries",
            format!("{} unitary lists for {} blocks", per_block.len(), ancilla.len()),
        ));
    }
    let mut blocks = Vec::with_capacity(per_block.len());
    for (j, (list, &k)) in per_block.iter().zip(ancilla.blocks()).enumerate() {
        let bp = at("/unitaries", j);
        let items = array(list, &bp)?;
        if items.len() != n {
            return Err(schema(&bp, format!("expected {n} unitaries, found {}", items.len())));
        }
        blocks.push(
            items
                .iter()
                .enumerate()
                .map(|(i, u)| unitary(u, k, &at(&bp, i), tol))
                .collect::<IoResult<Vec<_>>>()?,
        );
    }
    UnitaryTuple::new(ancilla, blocks).map_err(|e| model("", e))
}

pub fn tuple_to_json(t: &UnitaryTuple) -> Value {
    json!({
        "n": t.count(),
        "blocks": t.ancilla().blocks(),
        "weights": t.ancilla().weights(),
        "unitaries": t.blocks().iter().map(|bl| {
            bl.iter().map(|u| matrix_to_json(u.matrix())).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
    })
}

fn four_index(v: &Value, n: usize, k: usize, path: &str) -> IoResult<Vec<f64>> {
    let mut out = Vec::with_capacity(n * n * k * k);
    let xs = array(v, path)?;
    if xs.len() != n {
        return Err(schema(path, format!("expected {n} entries, found {}", xs.len())));
    }
    for (x, xv) in xs.iter().enumerate() {
        let xp = at(path, x);
        let ys = array(xv, &xp)?;
        if ys.len() != n {
            return Err(schema(&xp, format!("expected {n} entries, found {}", ys.len())));
        }
        for (y, yv) in ys.iter().enumerate() {
            out.extend(real_grid(yv, k, k, &at(&xp, y))?);
        }
    }
    Ok(out)
}

fn four_index_to_json(values: &[f64], n: usize, k: usize) -> Value {
    let idx = |x: usize, y: usize, a: usize, b: usize| ((x * n + y) * k + a) * k + b;
    Value::Array(
        (0..n)
            .map(|x| {
                Value::Array(
                    (0..n)
                        .map(|y| {
                            Value::Array(
                                (0..k)
                                    .map(|a| Value::Array((0..k).map(|b| json!(values[idx(x, y, a, b)])).collect()))
                                    .collect(),
                            )
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn table_from_json(v: &Value, tol: f64) -> IoResult<CorrelationTable> {
    let obj = object(v, "")?;
    let n = usize_field(obj, "n", "")?;
    let k = usize_field(obj, "k", "")?;
    let p = four_index(field(obj, "p", "")?, n, k, "/p")?;
    CorrelationTable::new(n, k, p, tol).map_err(|e| model("/p", e))
}

pub fn table_to_json(t: &CorrelationTable) -> Value {
    json!({"n": t.n(), "k": t.k(), "p": four_index_to_json(t.entries(), t.n(), t.k())})
}

pub fn functional_from_json(v: &Value) -> IoResult<BellFunctional> {
    let obj = object(v, "")?;
    let n = usize_field(obj, "n", "")?;
    let k = usize_field(obj, "k", "")?;
    let coefficients = four_index(field(obj, "coefficients", "")?, n, k, "/coefficients")?;
    BellFunctional::new(n, k, coefficients).map_err(|e| model("/coefficients", e))
}

pub fn functional_to_json(f: &BellFunctional) -> Value {
    json!({"n": f.n(), "k": f.k(), "coefficients": four_index_to_json(f.coefficients(), f.n(), f.k())})
}

fn pvms_from_json(v: &Value, dim: usize, path: &str, tol: f64) -> IoResult<Vec<Pvm>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(x, ps)| {
            let xp = at(path, x);
            let projections = array(ps, &xp)?
                .iter()
                .enumerate()
                .map(|(a, m)| square_matrix(m, dim, &at(&xp, a)))
                .collect::<IoResult<Vec<_>>>()?;
            Pvm::new(projections, tol).map_err(|e| model(&xp, e))
        })
        .collect()
}

fn pvms_to_json(pvms: &[Pvm]) -> Value {
    Value::Array(
        pvms.iter()
            .map(|m| Value::Array(m.projections().iter().map(matrix_to_json).collect()))
            .collect(),
    )
}

fn vector_from_json(v: &Value, len: usize, path: &str) -> IoResult<CVector> {
    let obj = object(v, path)?;
    let read = |key: &str| -> IoResult<Vec<f64>> {
        let kp = at(path, key);
        let xs = array(field(obj, key, path)?, &kp)?;
        if xs.len() != len {
            return Err(schema(&kp, format!("expected {len} entries, found {}", xs.len())));
        }
        xs.iter().enumerate().map(|(i, x)| number(x, &at(&kp, i))).collect()
    };
    let re = read("re")?;
    let im = read("im")?;
    Ok(CVector::from_iterator(len, re.iter().zip(&im).map(|(&r, &i)| c(r, i))))
}

fn vector_to_json(v: &CVector) -> Value {
    json!({
        "re": v.iter().map(|z| z.re).collect::<Vec<_>>(),
        "im": v.iter().map(|z| z.im).collect::<Vec<_>>(),
    })
}

/// A strategy file, either model.
#[derive(Debug, Clone)]
pub enum StrategyFile {
    Tensor(TensorStrategy),
    Commuting(CommutingStrategy),
}

pub fn strategy_from_json(v: &Value, tol: f64) -> IoResult<StrategyFile> {
    let obj = object(v, "")?;
    let kind = field(obj, "kind", "")?
        .as_str()
        .ok_or_else(|| schema("/kind", "expected a string"))?;
    match kind {
        "tensor" => {
            let da = usize_field(obj, "dimA", "")?;
            let db = usize_field(obj, "dimB", "")?;
            let alice = pvms_from_json(field(obj, "alice", "")?, da, "/alice", tol)?;
            let bob = pvms_from_json(field(obj, "bob", "")?, db, "/bob", tol)?;
            let psi = vector_from_json(field(obj, "psi", "")?, da * db, "/psi")?;
            TensorStrategy::new(alice, bob, psi, tol)
                .map(StrategyFile::Tensor)
                .map_err(|e| model("", e))
        }
        "commuting" => {
            let d = usize_field(obj, "dim", "")?;
            let alice = pvms_from_json(field(obj, "alice", "")?, d, "/alice", tol)?;
            let bob = pvms_from_json(field(obj, "bob", "")?, d, "/bob", tol)?;
            let psi = vector_from_json(field(obj, "psi", "")?, d, "/psi")?;
            CommutingStrategy::new(alice, bob, psi, tol)
                .map(StrategyFile::Commuting)
                .map_err(|e| model("", e))
        }
        other => Err(schema("/kind", format!("unknown strategy kind \"{other}\""))),
    }
}

pub fn tensor_strategy_to_json(s: &TensorStrategy) -> Value {
    let (da, db) = s.dims();
    json!({
        "kind": "tensor",
        "dimA": da,
        "dimB": db,
        "alice": pvms_to_json(s.alice()),
        "bob": pvms_to_json(s.bob()),
        "psi": vector_to_json(s.psi()),
    })
}

pub fn read_json(path: &Path) -> IoResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json(path: &Path, v: &Value) -> IoResult<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_matrix(path: &Path) -> IoResult<CMatrix> {
    matrix_from_json(&read_json(path)?, "")
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> IoResult<()> {
    write_json(path, &matrix_to_json(m))
}

pub fn read_channel(path: &Path) -> IoResult<QuantumChannel> {
    channel_from_json(&read_json(path)?)
}

pub fn write_channel(path: &Path, ch: &QuantumChannel) -> IoResult<()> {
    write_json(path, &channel_to_json(ch))
}

pub fn read_factorization(path: &Path, tol: f64) -> IoResult<FiniteFactorization> {
    factorization_from_json(&read_json(path)?, tol)
}

pub fn write_factorization(path: &Path, f: &FiniteFactorization) -> IoResult<()> {
    write_json(path, &factorization_to_json(f))
}

pub fn read_tuple(path: &Path, tol: f64) -> IoResult<UnitaryTuple> {
    tuple_from_json(&read_json(path)?, tol)
}

pub fn write_tuple(path: &Path, t: &UnitaryTuple) -> IoResult<()> {
    write_json(path, &tuple_to_json(t))
}

pub fn read_table(path: &Path, tol: f64) -> IoResult<CorrelationTable> {
    table_from_json(&read_json(path)?, tol)
}

pub fn write_table(path: &Path, t: &CorrelationTable) -> IoResult<()> {
    write_json(path, &table_to_json(t))
}
