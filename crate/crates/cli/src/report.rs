use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bellows_core::exact::format_rational;
use bellows_core::Rational;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Format, Global};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed files, inputs outside an operation's domain.
    Input(String),
    /// Files that cannot be read or written.
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

pub fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(input)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize")
}

/// Scalars in reports: rationals as `"p/q"`, complex numbers as
/// `["re", "im"]`, floats as numbers.
pub trait ScalarJson {
    fn json(&self) -> Value;
}

impl ScalarJson for Rational {
    fn json(&self) -> Value {
        Value::String(format_rational(self))
    }
}

impl ScalarJson for f64 {
    fn json(&self) -> Value {
        if self.is_finite() {
            json!(self)
        } else {
            Value::String(format!("{self}"))
        }
    }
}

impl ScalarJson for Complex64 {
    fn json(&self) -> Value {
        json!([format!("{}", self.re), format!("{}", self.im)])
    }
}

/// Outcome of a subcommand: the result object and whether the checked
/// property held.
pub struct Outcome {
    pub result: Value,
    pub ok: bool,
}

impl Outcome {
    pub fn ok(result: Value) -> Self {
        Outcome { result, ok: true }
    }

    pub fn checked(result: Value, ok: bool) -> Self {
        Outcome { result, ok }
    }
}

pub fn envelope(command: &str, global: &Global, outcome: &Outcome) -> Value {
    json!({
        "tool": "bellows",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": global.seed,
        "tolerances": {
            "edge_tol": global.edge_tol,
            "vol_tol": global.vol_tol,
            "rank_gap": global.rank_gap,
        },
        "status": if outcome.ok { "ok" } else { "fail" },
        "result": outcome.result,
    })
}

fn text_lines(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(&key, x, out);
            }
        }
        other => {
            let _ = writeln!(out, "{prefix}: {other}");
        }
    }
}

pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            text_lines("", report, &mut s);
            s
        }
    }
}
