//! Result tables and their CSV / JSON serialization.
//!
//! Every file starts with a header block: tool name and version, the fully
//! resolved configuration as `key=value` pairs, and any summary lines. Reals
//! are written with 17 significant digits so that they re-parse to the exact
//! computed values. Nothing time- or host-dependent is written, so identical
//! configurations produce byte-identical files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::CliError;

/// Output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Formats a real with 17 significant digits (`NaN`, `inf`, `-inf` for
/// non-finite values).
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(v) => format_real(*v),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Real(v) if v.is_finite() => {
                Value::Number(Number::from_str(&format_real(*v)).expect("formatted real is valid JSON"))
            }
            Cell::Real(_) => Value::Null,
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

/// A command's result: column names, rows and summary lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// `(key, value)` summary entries written after the configuration.
    pub summary: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn summarize(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }
}

/// Header metadata shared by both encodings.
pub struct Meta<'a> {
    pub command: &'a str,
    /// Resolved configuration as `key=value` pairs (sorted by key).
    pub config: Vec<(String, String)>,
}

/// Flattens a serializable argument struct into sorted `key=value` pairs.
pub fn config_pairs(args: &impl Serialize) -> Vec<(String, String)> {
    let value = serde_json::to_value(args).expect("argument structs serialize");
    let Value::Object(map) = value else {
        return Vec::new();
    };
    map.into_iter()
        .filter(|(_, v)| !v.is_null())
        .map(|(k, v)| {
            let text = match v {
                Value::String(s) => s,
                other => other.to_string(),
            };
            (k, text)
        })
        .collect()
}

pub fn render(table: &Table, meta: &Meta, format: Format) -> String {
    match format {
        Format::Csv => render_csv(table, meta),
        Format::Json => render_json(table, meta),
    }
}

fn render_csv(table: &Table, meta: &Meta) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tool=hypball");
    let _ = writeln!(out, "# version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# command={}", meta.command);
    for (k, v) in &meta.config {
        let _ = writeln!(out, "# {k}={v}");
    }
    for (k, v) in &table.summary {
        let _ = writeln!(out, "# summary {k}: {v}");
    }
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn render_json(table: &Table, meta: &Meta) -> String {
    let mut config = Map::new();
    for (k, v) in &meta.config {
        config.insert(k.clone(), Value::String(v.clone()));
    }
    let mut summary = Map::new();
    for (k, v) in &table.summary {
        summary.insert(k.clone(), Value::String(v.clone()));
    }
    let mut m = Map::new();
    m.insert("tool".into(), "hypball".into());
    m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    m.insert("command".into(), meta.command.into());
    m.insert("config".into(), Value::Object(config));
    m.insert("summary".into(), Value::Object(summary));
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (c, cell) in table.columns.iter().zip(row) {
                obj.insert((*c).to_string(), cell.json());
            }
            Value::Object(obj)
        })
        .collect();
    let mut top = Map::new();
    top.insert("meta".into(), Value::Object(m));
    top.insert("rows".into(), Value::Array(rows));
    let mut text = serde_json::to_string_pretty(&Value::Object(top)).expect("JSON values serialize");
    text.push('\n');
    text
}

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "HYPBALL_OUTPUT_DIR";

/// Resolves the destination: an explicit path, else
/// `$HYPBALL_OUTPUT_DIR/<command>.<ext>`, else standard output (`None`).
pub fn destination(explicit: Option<&PathBuf>, command: &str, format: Format) -> Option<PathBuf> {
    if let Some(p) = explicit {
        if p.as_os_str() == "-" {
            return None;
        }
        return Some(p.clone());
    }
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(format!("{command}.{}", format.extension())))
}

pub fn write(text: &str, dest: Option<&PathBuf>) -> Result<(), CliError> {
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, f64::MIN_POSITIVE, 0.551_136_363_636_363_6] {
            let s = format_real(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17, "{s}");
        }
        assert_eq!(Cell::Real(f64::NAN).json(), Value::Null);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["k", "value", "label"]);
        t.push(vec![0u32.into(), 1.0.into(), "a,b".into()]);
        t.summarize("pass", true);
        let meta = Meta {
            command: "coeffs",
            config: vec![("n".into(), "4".into())],
        };
        let s = render(&t, &meta, Format::Csv);
        assert_eq!(
            s,
            "# tool=hypball\n# version=0.1.0\n# command=coeffs\n# n=4\n# summary pass: true\nk,value,label\n0,1.0000000000000000e0,\"a,b\"\n"
        );
        let j: Value = serde_json::from_str(&render(&t, &meta, Format::Json)).unwrap();
        assert_eq!(j["rows"][0]["value"].as_f64(), Some(1.0));
        assert_eq!(j["meta"]["config"]["n"], "4");
    }
}
