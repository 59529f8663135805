use std::io::Write;
use std::path::Path;

use crate::Format;

/// A result in both shapes: a JSON document and a flat table.
pub struct Report {
    pub json: serde_json::Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(json: serde_json::Value, header: Vec<&'static str>) -> Self {
        Self { json, header, rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }
}

fn render(report: &Report, format: Format) -> Result<Vec<u8>, Box<dyn std::error::Error>> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.header)?;
            for r in &report.rows {
                w.write_record(r)?;
            }
            Ok(w.into_inner()?)
        }
    }
}

pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), Box<dyn std::error::Error>> {
    let bytes = render(report, format)?;
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
