//! Plain-text and CSV rendering of a finished run's manifest.

use std::fmt::Write as _;

use crate::output::{Cell, Manifest, Table};

pub const SUMMARY: &str = "summary.csv";

fn fmt_value(v: f64) -> String {
    if v.is_finite() && v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.6e}")
    } else {
        format!("{v:.6}")
    }
}

pub fn render_text(m: &Manifest) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} run ({} {})", m.kind, m.tool.name, m.tool.version);
    let _ = writeln!(s);
    if !m.derived.is_empty() {
        let _ = writeln!(s, "derived");
        for (k, q) in &m.derived {
            let _ = writeln!(s, "  {k:<32} {:>16} {}", fmt_value(q.value), q.unit);
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "results");
    for (k, q) in &m.results {
        let _ = writeln!(s, "  {k:<32} {:>16} {}", fmt_value(q.value), q.unit);
    }
    if !m.checks.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "checks");
        let _ = writeln!(s, "  {:<32} {:>16} {:>14} {:>14}  status", "name", "value", "lower", "upper");
        for c in &m.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(
                s,
                "  {:<32} {:>16} {:>14} {:>14}  {status}",
                c.name,
                fmt_value(c.value),
                fmt_value(c.lower),
                fmt_value(c.upper)
            );
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "outputs");
    for o in &m.outputs {
        let _ = writeln!(s, "  {:<20} {:>8} rows  [{}]", o.file, o.rows, o.columns.join(", "));
    }
    s
}

/// Results and checks as one long-format table.
pub fn summary_table(m: &Manifest) -> Table {
    let mut t = Table::new(SUMMARY, &["section", "name", "value", "unit", "lower", "upper", "passed"]);
    let blank = || Cell::Text(String::new());
    for (section, map) in [("derived", &m.derived), ("result", &m.results)] {
        for (k, q) in map {
            t.push(vec![section.into(), k.as_str().into(), q.value.into(), q.unit.as_str().into(), blank(), blank(), blank()]);
        }
    }
    for c in &m.checks {
        let passed = if c.passed { "true" } else { "false" };
        t.push(vec!["check".into(), c.name.as_str().into(), c.value.into(), blank(), c.lower.into(), c.upper.into(), passed.into()]);
    }
    t
}
