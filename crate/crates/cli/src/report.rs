//! One result, three renderings. Text and CSV are built from the same cells
//! so they can't drift apart.

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Default)]
pub struct Report {
    /// Free-form lines printed before the table in text mode.
    pub preamble: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Lines printed after the table in text mode.
    pub summary: Vec<String>,
    pub json: Value,
    /// A checked property failed (exit code 1).
    pub violated: bool,
}

impl Report {
    pub fn new(json: Value) -> Self {
        Report {
            json,
            ..Default::default()
        }
    }

    pub fn line(mut self, s: impl Into<String>) -> Self {
        self.preamble.push(s.into());
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.json).expect("json values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut out = String::new();
                if !self.header.is_empty() {
                    out.push_str(&csv_line(&self.header));
                    for row in &self.rows {
                        out.push_str(&csv_line(row));
                    }
                } else {
                    // key/value summary for commands without a table
                    out.push_str("key,value\n");
                    if let Value::Object(map) = &self.json {
                        for (k, v) in map {
                            let v = match v {
                                Value::String(s) => s.clone(),
                                other => other.to_string(),
                            };
                            out.push_str(&csv_line(&[k.clone(), v]));
                        }
                    }
                }
                out
            }
            Format::Text => {
                let mut out = String::new();
                for l in &self.preamble {
                    out.push_str(l);
                    out.push('\n');
                }
                if !self.header.is_empty() {
                    out.push_str(&aligned(&self.header, &self.rows));
                }
                for l in &self.summary {
                    out.push_str(l);
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn csv_line(cells: &[String]) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    w.write_record(cells).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 cells")
}

fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header
        .len()
        .max(rows.iter().map(Vec::len).max().unwrap_or(0));
    let mut width = vec![0; cols];
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (i, c) in row.iter().enumerate() {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:>w$}", w = width[i]))
            .collect();
        out.push_str(cells.join(" ").trim_end());
        out.push('\n');
    }
    out
}
