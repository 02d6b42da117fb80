//! CSV tables and the `run.json` manifest.
//!
//! Manifest layout (JSON object, keys in this order):
//!
//! | key          | content                                                        |
//! |--------------|----------------------------------------------------------------|
//! | `format`     | `"leakycav-run/1"`                                             |
//! | `tool`       | `{name, version}`                                              |
//! | `kind`       | scenario kind                                                  |
//! | `scenario`   | canonical scenario text as parsed                              |
//! | `parameters` | key → `{value, unit, source, given}`; `source` is `file`, `default` or `derived` |
//! | `derived`    | named constants computed before the run, `{value, unit}`       |
//! | `results`    | named scalar results, `{value, unit}`                          |
//! | `checks`     | `[{name, value, lower, upper, passed}]`                        |
//! | `outputs`    | `[{file, columns, rows}]`                                      |
//!
//! No timestamps or host data are recorded, so reruns are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scenario::{format_number, Scenario};
use crate::schema::{self, ParamValue};

pub const FORMAT: &str = "leakycav-run/1";
pub const MANIFEST: &str = "run.json";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// A named CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: &str, columns: &[&str]) -> Self {
        Self { file: file.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width in {}", self.file);
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| Cell::Num(v)).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                match c {
                    Cell::Num(v) => write!(s, "{}", csv_number(*v)).unwrap(),
                    Cell::Text(t) => s.push_str(t),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// 15 significant digits in scientific notation.
pub fn csv_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.14e}")
    } else {
        format!("{v}")
    }
}

// serde_json writes non-finite floats as null
fn null_as_nan<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    #[serde(deserialize_with = "null_as_nan")]
    pub value: f64,
    pub unit: String,
}

pub fn q(value: f64, unit: &str) -> Quantity {
    Quantity { value, unit: unit.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(deserialize_with = "null_as_nan")]
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

impl Check {
    pub fn within(name: &str, value: f64, lower: f64, upper: f64) -> Self {
        Self { name: name.into(), value, lower, upper, passed: value >= lower && value <= upper }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub value: serde_json::Value,
    pub unit: String,
    pub source: String,
    /// Text as written in the file, before unit conversion.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub given: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub tool: Tool,
    pub kind: String,
    pub scenario: String,
    pub parameters: BTreeMap<String, ParamRecord>,
    pub derived: BTreeMap<String, Quantity>,
    pub results: BTreeMap<String, Quantity>,
    pub checks: Vec<Check>,
    pub outputs: Vec<OutputRecord>,
}

/// Everything a runner produces.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub derived: BTreeMap<String, Quantity>,
    pub results: BTreeMap<String, Quantity>,
    pub checks: Vec<Check>,
}

impl RunOutput {
    pub fn derive(&mut self, key: &str, value: f64, unit: &str) {
        self.derived.insert(key.into(), q(value, unit));
    }

    pub fn result(&mut self, key: &str, value: f64, unit: &str) {
        self.results.insert(key.into(), q(value, unit));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn param_records(s: &Scenario) -> BTreeMap<String, ParamRecord> {
    let specs = schema::specs(s.kind);
    s.params
        .iter()
        .map(|(k, p)| {
            let unit = specs.iter().find(|sp| sp.key == k).map(|sp| sp.kind.unit_label()).unwrap_or("");
            let value = match &p.value {
                ParamValue::Number(v) => serde_json::json!(v),
                ParamValue::Count(n) => serde_json::json!(n),
                ParamValue::Text(t) => serde_json::json!(t),
            };
            let given = p.given.as_ref().map(|g| g.to_string());
            (k.clone(), ParamRecord { value, unit: unit.into(), source: p.source.label().into(), given })
        })
        .collect()
}

pub fn manifest(s: &Scenario, out: &RunOutput) -> Manifest {
    Manifest {
        format: FORMAT.into(),
        tool: Tool { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() },
        kind: s.kind.name().into(),
        scenario: s.raw.serialize(),
        parameters: param_records(s),
        derived: out.derived.clone(),
        results: out.results.clone(),
        checks: out.checks.clone(),
        outputs: out
            .tables
            .iter()
            .map(|t| OutputRecord { file: t.file.clone(), columns: t.columns.clone(), rows: t.rows.len() })
            .collect(),
    }
}

/// Write all tables and the manifest into `dir`.
pub fn write_run(dir: &Path, s: &Scenario, out: &RunOutput) -> io::Result<Manifest> {
    fs::create_dir_all(dir)?;
    for t in &out.tables {
        fs::write(dir.join(&t.file), t.to_csv())?;
    }
    let m = manifest(s, out);
    let mut json = serde_json::to_string_pretty(&m).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(dir.join(MANIFEST), json)?;
    Ok(m)
}

pub fn read_manifest(path: &Path) -> io::Result<Manifest> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Header comment lines echoing resolved parameters, for terminal output.
pub fn describe_params(s: &Scenario) -> String {
    let mut out = String::new();
    for (k, r) in param_records(s) {
        let v = match &r.value {
            serde_json::Value::Number(n) => n.as_f64().map(format_number).unwrap_or_default(),
            other => other.as_str().map(str::to_string).unwrap_or_else(|| other.to_string()),
        };
        let _ = writeln!(out, "  {k:<28} {v} {} ({})", r.unit, r.source);
    }
    out
}
