//! Verification reports: JSON for machines, aligned tables for people.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub scenario: Option<String>,
    pub toolkit_version: String,
    pub tolerance: f64,
    pub seed: u64,
    pub queries: Vec<QueryResult>,
    /// Declarations that failed at run time.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// One measured quantity against its tolerance. `within` records whether
/// the residual is inside the tolerance; `pass` whether that matches what
/// the query expected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub within: bool,
    pub pass: bool,
}

impl Check {
    pub fn expect_within(name: &str, residual: f64, tolerance: f64) -> Check {
        Check::expecting(name, residual, tolerance, true)
    }

    pub fn expecting(name: &str, residual: f64, tolerance: f64, expected: bool) -> Check {
        let within = residual.is_finite() && residual <= tolerance;
        Check { name: name.into(), residual: finite(residual), tolerance, within, pass: within == expected }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorRow {
    pub label: String,
    pub signature: Vec<f64>,
    pub weight: f64,
    pub factor: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub index: usize,
    pub kind: String,
    pub line: usize,
    pub source: String,
    pub status: Status,
    pub values: Map<String, Value>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sectors: Option<Vec<SectorRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl QueryResult {
    pub fn new(index: usize, kind: &str, line: usize, source: String) -> Self {
        QueryResult {
            index,
            kind: kind.into(),
            line,
            source,
            status: Status::Pass,
            values: Map::new(),
            checks: Vec::new(),
            sectors: None,
            error: None,
            wall_ms: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.values.insert(key.into(), value.into());
    }

    pub fn number(&mut self, key: &str, x: f64) {
        self.values.insert(key.into(), number(x));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Status from the checks, unless an error was recorded.
    pub fn settle(&mut self) {
        self.status = if self.error.is_some() {
            Status::Error
        } else if self.checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
    }
}

/// Replacement for values JSON cannot carry.
fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn complex(z: qsector::C64) -> Value {
    let mut m = Map::new();
    m.insert("re".into(), number(z.re));
    m.insert("im".into(), number(z.im));
    Value::Object(m)
}

impl Report {
    pub fn new(scenario: Option<String>, tolerance: f64, seed: u64, queries: Vec<QueryResult>) -> Self {
        let mut summary = Summary { total: queries.len(), ..Summary::default() };
        for q in &queries {
            match q.status {
                Status::Pass => summary.passed += 1,
                Status::Fail => summary.failed += 1,
                Status::Error => summary.errors += 1,
            }
        }
        Report {
            schema: SCHEMA,
            scenario,
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            tolerance,
            seed,
            queries,
            warnings: Vec::new(),
            summary,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.passed == self.summary.total
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

/// Writes floats with 17 significant digits.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json(report: &Report) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    report.serialize(&mut ser).expect("report serialises");
    let mut s = String::from_utf8(out).expect("JSON is UTF-8");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> serde_json::Result<Report> {
    serde_json::from_str(text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Human,
    Machine,
}

pub fn format_report(report: &Report, mode: Mode) -> String {
    match mode {
        Mode::Machine => to_json(report),
        Mode::Human => human(report),
    }
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        format!("    {}\n", padded.join("  ").trim_end())
    };
    out.push_str(&line(header.to_vec()));
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.12}").trim_end_matches('0').trim_end_matches('.').to_string(),
            _ => n.to_string(),
        },
        Value::Object(m) if m.contains_key("re") => {
            let re = m["re"].as_f64().unwrap_or(f64::NAN);
            let im = m["im"].as_f64().unwrap_or(f64::NAN);
            format!("{re:.12}{im:+.12}i")
        }
        Value::Array(items) => format!("[{}]", items.iter().map(show).collect::<Vec<_>>().join(", ")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn plural(n: usize, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

fn human(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {}  (qsector {}, tol {:e}, seed {})",
        report.scenario.as_deref().unwrap_or("<unnamed>"),
        report.toolkit_version,
        report.tolerance,
        report.seed
    );
    for q in &report.queries {
        let timing = q.wall_ms.map(|t| format!("  {t:.3} ms")).unwrap_or_default();
        let _ = writeln!(
            out,
            "\n[{}] line {}: {}  {}{}",
            q.index,
            q.line,
            q.source,
            q.status.as_str().to_uppercase(),
            timing
        );
        if let Some(e) = &q.error {
            let _ = writeln!(out, "    error: {e}");
        }
        if !q.values.is_empty() {
            let rows: Vec<Vec<String>> = q.values.iter().map(|(k, v)| vec![k.clone(), show(v)]).collect();
            table(&mut out, &["value", ""], &rows);
        }
        if !q.checks.is_empty() {
            let rows: Vec<Vec<String>> = q
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        format!("{:.3e}", c.residual),
                        format!("{:.1e}", c.tolerance),
                        if c.within { "yes" } else { "no" }.into(),
                        if c.pass { "ok" } else { "FAIL" }.into(),
                    ]
                })
                .collect();
            table(&mut out, &["check", "residual", "tolerance", "within", "result"], &rows);
        }
        if let Some(sectors) = &q.sectors {
            let rows: Vec<Vec<String>> = sectors
                .iter()
                .map(|s| {
                    vec![
                        s.label.clone(),
                        format!("{:.12}", s.weight),
                        if s.factor { "factor" } else { "mixed" }.into(),
                        s.position.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
                    ]
                })
                .collect();
            table(&mut out, &["sector", "weight", "type", "pointer"], &rows);
        }
    }
    for w in &report.warnings {
        let _ = writeln!(out, "\nwarning: {w}");
    }
    let s = &report.summary;
    let _ = writeln!(
        out,
        "\n{}: {} passed, {} failed, {} errors",
        plural(s.total, "query", "queries"),
        s.passed,
        s.failed,
        s.errors
    );
    out
}
