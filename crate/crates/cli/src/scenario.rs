//! Scenario files: line-oriented `section.key = value [unit]`.
//!
//! ```text
//! # comment
//! kind = crosscheck
//! output_dir = out/crosscheck
//! potential.V0 = 10 natural
//! cavity.L = 27.57 mm
//! pml.exponent = 2
//! ```
//!
//! A value is a decimal number (optional sign, fraction and exponent)
//! followed by an optional unit, or a single bare word. Only full-line
//! comments are recognized.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::schema::{self, Kind, ParamValue, Spec, SpecKind};
use crate::units::Unit;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number { value: f64, unit: Option<Unit> },
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number { value, unit } => {
                write!(f, "{}", format_number(*value))?;
                if let Some(u) = unit {
                    write!(f, " {u}")?;
                }
                Ok(())
            }
            Value::Text(s) => f.write_str(s),
        }
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: Value,
    pub line: usize,
}

/// Parameter tree as written in the file, keyed by the full dotted name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawScenario {
    pub entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ErrorKind {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("duplicate key `{0}`")]
    Duplicate(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("unknown unit `{unit}` for `{key}`")]
    UnknownUnit { key: String, unit: String },
    #[error("`{key}` is a {expected}; unit `{unit}` does not apply")]
    WrongUnit { key: String, unit: String, expected: String },
    #[error("`{key}` needs a unit ({expected})")]
    MissingUnit { key: String, expected: String },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("`{key}` = {value} is out of range: {reason}")]
    OutOfRange { key: String, value: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ScenarioError {
    pub line: usize,
    pub kind: ErrorKind,
}

fn err(line: usize, kind: ErrorKind) -> ScenarioError {
    ScenarioError { line, kind }
}

fn is_number(tok: &str) -> bool {
    let b = tok.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

fn valid_key(key: &str) -> bool {
    let parts: Vec<&str> = key.split('.').collect();
    parts.len() <= 2
        && parts.iter().all(|p| {
            !p.is_empty()
                && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && p.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        })
}

impl RawScenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (key, rest) = t
                .split_once('=')
                .ok_or_else(|| err(line, ErrorKind::Syntax("expected `key = value [unit]`".into())))?;
            let key = key.trim();
            if !valid_key(key) {
                return Err(err(line, ErrorKind::Syntax(format!("malformed key `{key}`"))));
            }
            let toks: Vec<&str> = rest.split_whitespace().collect();
            let value = match toks.as_slice() {
                [] => return Err(err(line, ErrorKind::Syntax(format!("`{key}` has no value")))),
                [v, rest @ ..] if is_number(v) => {
                    let value: f64 = v.parse().map_err(|_| err(line, ErrorKind::Syntax(format!("bad number `{v}`"))))?;
                    let unit = match rest {
                        [] => None,
                        [u] => Some(Unit::parse(u).ok_or_else(|| {
                            err(line, ErrorKind::UnknownUnit { key: key.into(), unit: (*u).into() })
                        })?),
                        _ => return Err(err(line, ErrorKind::Syntax(format!("trailing text after `{key}`")))),
                    };
                    Value::Number { value, unit }
                }
                [word] => Value::Text((*word).into()),
                _ => return Err(err(line, ErrorKind::Syntax(format!("`{key}`: expected one word or a number with unit")))),
            };
            if entries.insert(key.to_string(), Entry { value, line }).is_some() {
                return Err(err(line, ErrorKind::Duplicate(key.into())));
            }
        }
        Ok(Self { entries })
    }

    /// Canonical text: `kind` first, then every key in sorted order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if let Some(k) = self.entries.get("kind") {
            out.push_str(&format!("kind = {}\n", k.value));
        }
        for (key, e) in self.entries.iter().filter(|(k, _)| k.as_str() != "kind") {
            out.push_str(&format!("{key} = {}\n", e.value));
        }
        out
    }

    /// Keys and values without line numbers, for round-trip comparison.
    pub fn tree(&self) -> BTreeMap<String, Value> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.value.clone())).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    File,
    Default,
    /// Default computed from other parameters.
    Derived,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::File => "file",
            Source::Default => "default",
            Source::Derived => "derived",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: ParamValue,
    pub source: Source,
    /// As written, when it came from the file.
    pub given: Option<Value>,
    pub line: Option<usize>,
}

/// A validated scenario with every parameter resolved to the units the
/// numerical core expects.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: Kind,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub params: BTreeMap<String, Param>,
    pub raw: RawScenario,
}

impl Scenario {
    pub fn number(&self, key: &str) -> f64 {
        match self.params.get(key).map(|p| &p.value) {
            Some(ParamValue::Number(v)) => *v,
            Some(ParamValue::Count(n)) => *n as f64,
            other => panic!("parameter `{key}` is not numeric: {other:?}"),
        }
    }

    pub fn count(&self, key: &str) -> u64 {
        match self.params.get(key).map(|p| &p.value) {
            Some(ParamValue::Count(n)) => *n,
            other => panic!("parameter `{key}` is not a count: {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.params.get(key).map(|p| &p.value) {
            Some(ParamValue::Text(s)) => s,
            other => panic!("parameter `{key}` is not text: {other:?}"),
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }
}

/// Parse and validate.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw = RawScenario::parse(text)?;
    resolve(raw)
}

fn convert(spec: &Spec, entry: &Entry) -> Result<ParamValue, ScenarioError> {
    let key = spec.key;
    let line = entry.line;
    let v = match (&spec.kind, &entry.value) {
        (SpecKind::Choice(options), Value::Text(s)) => {
            if !options.contains(&s.as_str()) {
                let reason = format!("expected one of {}", options.join(", "));
                return Err(err(line, ErrorKind::Invalid { key: key.into(), reason }));
            }
            ParamValue::Text(s.clone())
        }
        (SpecKind::Path, Value::Text(s)) => ParamValue::Text(s.clone()),
        (SpecKind::Count, Value::Number { value, unit }) => {
            if let Some(u) = unit {
                let kind = ErrorKind::WrongUnit { key: key.into(), unit: u.to_string(), expected: "count".into() };
                return Err(err(line, kind));
            }
            if value.fract() != 0.0 || *value < 0.0 || *value > 1e15 {
                let reason = "expected a non-negative integer".into();
                return Err(err(line, ErrorKind::Invalid { key: key.into(), reason }));
            }
            ParamValue::Count(*value as u64)
        }
        (SpecKind::Real, Value::Number { value, unit }) => {
            if let Some(u) = unit {
                let expected = "dimensionless number".into();
                return Err(err(line, ErrorKind::WrongUnit { key: key.into(), unit: u.to_string(), expected }));
            }
            ParamValue::Number(*value)
        }
        (SpecKind::Quantity(canon), Value::Number { value, unit }) => {
            let expected = match canon.unit() {
                Unit::Natural => format!("{} in natural units", canon.dim()),
                u => format!("{} such as {u}", canon.dim()),
            };
            let Some(u) = unit else {
                return Err(err(line, ErrorKind::MissingUnit { key: key.into(), expected }));
            };
            let v = canon
                .convert(*value, *u)
                .ok_or_else(|| err(line, ErrorKind::WrongUnit { key: key.into(), unit: u.to_string(), expected }))?;
            ParamValue::Number(v)
        }
        (_, other) => {
            let reason = format!("unexpected value `{other}` ({})", spec.kind.describe());
            return Err(err(line, ErrorKind::Invalid { key: key.into(), reason }));
        }
    };
    spec.range.check(&v).map_err(|reason| {
        let value = match v {
            ParamValue::Number(x) => x,
            ParamValue::Count(n) => n as f64,
            ParamValue::Text(_) => f64::NAN,
        };
        err(line, ErrorKind::OutOfRange { key: key.into(), value, reason })
    })?;
    Ok(v)
}

/// Validate a raw tree against the schema of its `kind`.
pub fn resolve(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    let kind_entry = raw.entries.get("kind").ok_or_else(|| err(1, ErrorKind::MissingKey("kind".into())))?;
    let kind_line = kind_entry.line;
    let kind = match &kind_entry.value {
        Value::Text(s) => Kind::parse(s).ok_or_else(|| {
            let reason = format!("expected one of {}", Kind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", "));
            err(kind_line, ErrorKind::Invalid { key: "kind".into(), reason })
        })?,
        other => {
            let reason = format!("expected a word, got `{other}`");
            return Err(err(kind_line, ErrorKind::Invalid { key: "kind".into(), reason }));
        }
    };
    let specs = schema::specs(kind);

    for (key, e) in &raw.entries {
        if key != "kind" && !specs.iter().any(|s| s.key == key) {
            return Err(err(e.line, ErrorKind::UnknownKey(key.clone())));
        }
    }

    let mut params = BTreeMap::new();
    for spec in &specs {
        if let Some(e) = raw.entries.get(spec.key) {
            let value = convert(spec, e)?;
            params.insert(
                spec.key.to_string(),
                Param { value, source: Source::File, given: Some(e.value.clone()), line: Some(e.line) },
            );
        }
    }
    // unconditional defaults first, so conditions can see defaulted choices
    for pass_conditional in [false, true] {
        for spec in specs.iter().filter(|s| s.when.is_some() == pass_conditional) {
            let applies = spec.applies(&schema::Context { params: &params });
            if params.contains_key(spec.key) {
                if !applies {
                    let line = raw.entries[spec.key].line;
                    let reason = format!("not used {}", spec.condition_text());
                    return Err(err(line, ErrorKind::Invalid { key: spec.key.into(), reason }));
                }
                continue;
            }
            if !applies {
                continue;
            }
            let value = match spec.default {
                schema::Fallback::Required => return Err(err(kind_line, ErrorKind::MissingKey(spec.key.into()))),
                schema::Fallback::Optional | schema::Fallback::Computed(_) => continue,
                schema::Fallback::Number(v) => ParamValue::Number(v),
                schema::Fallback::Count(n) => ParamValue::Count(n),
                schema::Fallback::Text(s) => ParamValue::Text(s.into()),
            };
            params.insert(spec.key.to_string(), Param { value, source: Source::Default, given: None, line: None });
        }
    }
    // computed defaults see the plain defaults
    for spec in &specs {
        if let schema::Fallback::Computed(f) = spec.default {
            if !params.contains_key(spec.key) && spec.applies(&schema::Context { params: &params }) {
                let v = f(&schema::Context { params: &params });
                spec.range.check(&v).map_err(|reason| {
                    let value = if let ParamValue::Number(x) = v { x } else { f64::NAN };
                    err(kind_line, ErrorKind::OutOfRange { key: spec.key.into(), value, reason })
                })?;
                params.insert(spec.key.to_string(), Param { value: v, source: Source::Derived, given: None, line: None });
            }
        }
    }
    schema::cross_checks(kind, &params).map_err(|(key, reason)| {
        let line = params.get(key).and_then(|p| p.line).unwrap_or(kind_line);
        err(line, ErrorKind::Invalid { key: key.into(), reason })
    })?;

    let output_dir = match params.get("output_dir").map(|p| &p.value) {
        Some(ParamValue::Text(s)) => PathBuf::from(s),
        _ => PathBuf::from(format!("out/{}", kind.name())),
    };
    let seed = match params.get("seed").map(|p| &p.value) {
        Some(ParamValue::Count(n)) => *n,
        _ => 0,
    };
    Ok(Scenario { kind, output_dir, seed, params, raw })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_grammar() {
        for ok in ["1", "-2.5", "+.5", "3.", "1e-6", "6.02E+23"] {
            assert!(is_number(ok), "{ok}");
        }
        for bad in ["", ".", "e5", "1e", "inf", "NaN", "1.2.3", "0x10", "1_000"] {
            assert!(!is_number(bad), "{bad}");
        }
    }

    #[test]
    fn raw_parse_and_errors() {
        let r = RawScenario::parse("# c\nkind = tdse\n\npotential.V0 = 10 natural\n").unwrap();
        assert_eq!(r.entries["potential.V0"].line, 4);
        assert_eq!(r.entries["potential.V0"].value, Value::Number { value: 10.0, unit: Some(Unit::Natural) });
        let e = RawScenario::parse("kind = tdse\na.b = 1 parsec\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ErrorKind::UnknownUnit { .. }));
        let e = RawScenario::parse("a = 1\na = 2\n").unwrap_err();
        assert_eq!(e, err(2, ErrorKind::Duplicate("a".into())));
        assert!(RawScenario::parse("a.b.c = 1").is_err());
        assert!(RawScenario::parse("novalue").is_err());
        assert!(RawScenario::parse("a = two words").is_err());
    }

    #[test]
    fn numbers_print_back_exactly() {
        for v in [0.1, 1e-20, 27.57, 3.0, -4.5e300, 1.0 / 3.0] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_number(8.0), "8");
    }
}
