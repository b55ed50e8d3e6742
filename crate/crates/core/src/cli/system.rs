//! System description files.
//!
//! ```json
//! {
//!   "name": "coupled",
//!   "rows": 2, "cols": 2,
//!   "parameters": { "b": 100 },
//!   "entries": [
//!     [ { "num": [1], "den": [1, 1] }, { "num": ["b"], "den": [1, 1] } ],
//!     [ { "num": [0], "den": [1] },    { "num": [1], "den": [1, 1] } ]
//!   ]
//! }
//! ```
//!
//! Coefficients ascend in `s`. A coefficient is a number or an arithmetic
//! expression over the declared parameters.

use std::collections::BTreeMap;
use std::path::Path;

use exmex::Express;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::polyrat::{Polynomial, RationalFunction};
use crate::tfmatrix::TransferMatrix;
use crate::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntrySpec {
    pub num: Vec<Value>,
    pub den: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<EntrySpec>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
}

/// A validated system with its parameters substituted and entries reduced.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemDescription {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub matrix: TransferMatrix,
}

impl SystemDescription {
    pub fn new(name: &str, matrix: TransferMatrix) -> Self {
        Self { name: name.to_string(), parameters: BTreeMap::new(), matrix }
    }

    /// Numeric description of the reduced matrix; parsing it gives the same matrix back.
    pub fn to_file(&self) -> SystemFile {
        let m = &self.matrix;
        let coeffs = |p: &Polynomial| -> Vec<Value> {
            if p.is_zero() {
                vec![Value::from(0.0)]
            } else {
                p.coeffs().iter().map(|c| Value::from(*c)).collect()
            }
        };
        let entries = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| {
                        let f = m.get(i, j);
                        EntrySpec { num: coeffs(f.num()), den: coeffs(f.den()) }
                    })
                    .collect()
            })
            .collect();
        SystemFile { name: self.name.clone(), rows: m.rows(), cols: m.cols(), entries, parameters: BTreeMap::new() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("system files always serialize")
    }
}

pub fn parse_system(path: &Path, tol: &Tolerances) -> Result<SystemDescription> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_system_str(&text, &path.display().to_string(), tol)
}

/// `location` prefixes error locations, usually the file name.
pub fn parse_system_str(text: &str, location: &str, tol: &Tolerances) -> Result<SystemDescription> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("{location}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    build_system(&file, &BTreeMap::new(), location, tol)
}

/// Instantiates `file`, with `overrides` taking precedence over its own parameter values.
pub fn build_system(
    file: &SystemFile,
    overrides: &BTreeMap<String, f64>,
    location: &str,
    tol: &Tolerances,
) -> Result<SystemDescription> {
    let mut params = file.parameters.clone();
    params.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
    if file.rows == 0 || file.cols == 0 {
        return Err(Error::Validation(format!("{location}: matrix must have at least one row and one column")));
    }
    if file.entries.len() != file.rows {
        return Err(Error::Validation(format!(
            "{location}: ragged grid, rows = {} but {} entry rows given",
            file.rows,
            file.entries.len()
        )));
    }
    let mut entries = Vec::with_capacity(file.rows * file.cols);
    for (i, row) in file.entries.iter().enumerate() {
        if row.len() != file.cols {
            return Err(Error::Validation(format!(
                "{location}: ragged grid, row {i} has {} entries, cols = {}",
                row.len(),
                file.cols
            )));
        }
        for (j, e) in row.iter().enumerate() {
            let at = |field: &str| format!("{location}: entries[{i}][{j}].{field}");
            let num = Polynomial::new(coefficients(&e.num, &params, &at("num"))?);
            if e.den.is_empty() {
                return Err(Error::Validation(format!("{}: empty denominator", at("den"))));
            }
            let den = Polynomial::new(coefficients(&e.den, &params, &at("den"))?);
            if den.is_zero() {
                return Err(Error::Validation(format!("{}: zero denominator", at("den"))));
            }
            entries.push(RationalFunction::with_tol(num, den, tol)?);
        }
    }
    let matrix = TransferMatrix::new(file.rows, file.cols, entries)?;
    Ok(SystemDescription { name: file.name.clone(), parameters: params, matrix })
}

fn coefficients(values: &[Value], params: &BTreeMap<String, f64>, at: &str) -> Result<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let here = format!("{at}[{k}]");
            let x = match v {
                Value::Number(n) => n.as_f64().ok_or_else(|| parse_err(&here, "number out of range"))?,
                Value::String(s) => evaluate(s, params, &here)?,
                _ => return Err(parse_err(&here, "coefficient must be a number or an expression string")),
            };
            if !x.is_finite() {
                return Err(Error::Validation(format!("{here}: coefficient is not finite")));
            }
            Ok(x)
        })
        .collect()
}

fn evaluate(expr: &str, params: &BTreeMap<String, f64>, at: &str) -> Result<f64> {
    let parsed = exmex::parse::<f64>(expr).map_err(|e| parse_err(at, &e.to_string()))?;
    let values = parsed
        .var_names()
        .iter()
        .map(|v| params.get(v).copied().ok_or_else(|| parse_err(at, &format!("unknown parameter `{v}`"))))
        .collect::<Result<Vec<_>>>()?;
    parsed.eval(&values).map_err(|e| parse_err(at, &e.to_string()))
}

fn parse_err(location: &str, message: &str) -> Error {
    Error::Parse { location: location.to_string(), message: message.to_string() }
}
