//! CSV reading and writing. Floats are written with Rust's shortest
//! round-trip formatting so identical runs produce identical bytes.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

pub fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn write(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Appends raw footer lines (fit summaries) after the data block.
pub fn append_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut f = OpenOptions::new()
        .append(true)
        .open(path)
        .with_context(|| format!("appending to {}", path.display()))?;
    for line in lines {
        writeln!(f, "{line}")?;
    }
    Ok(())
}

pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads a numeric CSV table, skipping `#` comment lines.
pub fn read_numeric(path: &Path) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers: Vec<String> = rdr
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.with_context(|| format!("row {} of {}", i + 2, path.display()))?;
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().with_context(|| {
                format!(
                    "row {} column {} ({}) of {}: not a number: {field:?}",
                    i + 2,
                    j + 1,
                    headers.get(j).map(String::as_str).unwrap_or("?"),
                    path.display()
                )
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    Ok(Table { headers, rows })
}
