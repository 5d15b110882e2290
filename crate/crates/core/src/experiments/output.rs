//! Tabular scenario results, CSV/JSON emission and atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Significant digits written to CSV.
pub const CSV_SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Named equal-length columns plus the metadata needed to rerun them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub name: String,
    pub columns: Vec<Column>,
    pub metadata: Map<String, Value>,
}

impl ScenarioResult {
    pub fn new(name: impl Into<String>) -> ScenarioResult {
        ScenarioResult { name: name.into(), columns: Vec::new(), metadata: Map::new() }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if let Some(first) = self.columns.first() {
            if first.values.len() != values.len() {
                return Err(Error::DimensionMismatch { expected: first.values.len(), found: values.len() });
            }
        }
        if self.columns.iter().any(|c| c.name == name) {
            return Err(Error::InvalidParameter(format!("duplicate column '{name}'")));
        }
        self.columns.push(Column { name, values });
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn meta(&mut self, key: &str, value: impl serde::Serialize) -> Result<()> {
        self.metadata.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in 0..self.rows() {
            for (k, col) in self.columns.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&format_sig(col.values[row], CSV_SIGNIFICANT_DIGITS));
            }
            out.push('\n');
        }
        out
    }

    /// Metadata object with the scenario name, column list, row count and
    /// crate version added.
    pub fn metadata_json(&self) -> Value {
        let mut meta = self.metadata.clone();
        meta.insert("scenario".into(), Value::from(self.name.clone()));
        meta.insert("version".into(), Value::from(crate::VERSION));
        meta.insert("rows".into(), Value::from(self.rows()));
        meta.insert(
            "columns".into(),
            Value::from(self.columns.iter().map(|c| c.name.clone()).collect::<Vec<_>>()),
        );
        Value::Object(meta)
    }

    /// Write `csv_path` and its companion metadata file (same stem,
    /// `.json`). Returns the metadata path.
    pub fn write(&self, csv_path: &Path) -> Result<PathBuf> {
        let meta_path = metadata_path(csv_path);
        let meta = serde_json::to_string_pretty(&self.metadata_json())? + "\n";
        write_atomic(csv_path, self.to_csv().as_bytes())?;
        write_atomic(&meta_path, meta.as_bytes())?;
        Ok(meta_path)
    }
}

pub fn metadata_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Format with `digits` significant digits: positional notation for
/// moderate magnitudes, exponent notation otherwise, trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mut s = trim_zeros(mantissa.to_string());
        let _ = write!(s, "e{exp}");
        s
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

/// Write `bytes` to a temporary file next to `path`, then rename it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("output path '{}' has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}
