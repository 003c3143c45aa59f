//! Report plumbing: canonical JSON with sorted keys and 17 significant digits,
//! CSV tables, run metadata, and no-clobber file output.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::linalg::Tolerance;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// `{:.16e}`: 17 significant digits, locale independent.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            if items.iter().all(|i| matches!(i, Value::Number(_))) {
                out.push('[');
                for (k, i) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, i, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, i) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, i, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*key], indent + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Deterministic JSON text: sorted keys, two-space indent, floats as `{:.16e}`.
/// Non-finite floats are written as `null` by serde and stay `null`.
pub fn canonical_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMeta {
    pub command: String,
    pub version: String,
    pub spec_sha256: Option<String>,
    pub seed: u64,
    pub tol_abs: f64,
    pub tol_rel: f64,
}

impl RunMeta {
    pub fn new(command: &str, spec_text: Option<&str>, seed: u64, tol: &Tolerance) -> Self {
        Self {
            command: command.into(),
            version: VERSION.into(),
            spec_sha256: spec_text.map(sha256_hex),
            seed,
            tol_abs: tol.abs,
            tol_rel: tol.rel,
        }
    }

    /// `{"meta": .., "result": ..}` as canonical JSON.
    pub fn wrap<T: Serialize>(&self, result: &T) -> String {
        let mut m = Map::new();
        m.insert("meta".into(), to_value(self));
        m.insert("result".into(), to_value(result));
        canonical_json(&Value::Object(m))
    }
}

/// Numeric table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes `content` to `path`, refusing to replace an existing file unless `force`.
pub fn write_output(path: &Path, content: &str, force: bool) -> io::Result<()> {
    if path.exists() && !force {
        return Err(io::Error::new(
            io::ErrorKind::AlreadyExists,
            format!("{} exists; pass --force to overwrite", path.display()),
        ));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content)
}
