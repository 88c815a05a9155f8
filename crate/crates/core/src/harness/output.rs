//! CSV tables with a `#` metadata preamble.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const VERSION: &str = concat!("penalty-stab ", env!("CARGO_PKG_VERSION"));

/// 17 significant digits, enough to round-trip any binary64 value.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Absent values become empty cells.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Ordered `key: value` lines written as `# key: value`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(config_json: &str) -> Self {
        let mut m = Metadata::default();
        m.push("version", VERSION);
        m.push("config", config_json);
        m
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let value: String = value.into();
        // keep every entry on one comment line
        self.entries.push((key.into(), value.replace(['\n', '\r'], " ")));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }
}

pub fn write_csv(path: &Path, meta: &Metadata, table: &Table) -> Result<()> {
    let io = |e: &dyn std::fmt::Display| Error::io(path, e);
    let mut buf: Vec<u8> = Vec::new();
    for (k, v) in &meta.entries {
        writeln!(buf, "# {k}: {v}").map_err(|e| io(&e))?;
    }
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
        w.write_record(&table.header).map_err(|e| io(&e))?;
        for row in &table.rows {
            w.write_record(row).map_err(|e| io(&e))?;
        }
        w.flush().map_err(|e| io(&e))?;
    }
    std::fs::write(path, buf).map_err(|e| io(&e))
}

/// Inverse of [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Metadata, Table)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut meta = Metadata::default();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim_start();
        let (k, v) = body.split_once(": ").unwrap_or((body, ""));
        meta.entries.push((k.to_string(), v.to_string()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::io(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::io(path, e))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((meta, Table { header, rows }))
}
