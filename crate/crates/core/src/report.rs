//! Report assembly: JSON-lines records plus aligned text tables.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Result;

/// Four significant digits, switching to scientific notation far from 1.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-3..5).contains(&magnitude) {
        return format!("{x:.3e}");
    }
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn opt4(x: Option<f64>) -> String {
    x.map(sig4).unwrap_or_else(|| "-".into())
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    title: String,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(title: impl Into<String>, headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            title: title.into(),
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) {
        self.rows.push(cells.into_iter().map(Into::into).collect());
    }

    pub fn render(&self) -> String {
        let cols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> = (0..cols)
                .map(|i| {
                    let cell = cells.get(i).map(String::as_str).unwrap_or("");
                    format!("{cell:<width$}", width = widths[i])
                })
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str(&self.title);
            out.push('\n');
        }
        out.push_str(&line(&self.headers));
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&rule.join("  "));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}

/// Machine records and human text for one command.
#[derive(Debug, Default)]
pub struct Report {
    records: Vec<Value>,
    text: String,
}

impl Report {
    /// Add a record tagged `kind`. Struct payloads are flattened next to the tag.
    pub fn record(&mut self, kind: &str, payload: &impl Serialize) -> Result<()> {
        let value = serde_json::to_value(payload)?;
        let mut map = Map::new();
        map.insert("record".into(), json!(kind));
        match value {
            Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("value".into(), other);
            }
        }
        self.records.push(Value::Object(map));
        Ok(())
    }

    pub fn text(&mut self, text: impl AsRef<str>) {
        if !self.text.is_empty() && !self.text.ends_with("\n\n") {
            self.text.push('\n');
        }
        self.text.push_str(text.as_ref());
        if !self.text.ends_with('\n') {
            self.text.push('\n');
        }
    }

    pub fn table(&mut self, table: &Table) {
        self.text(table.render());
    }

    pub fn rendered_text(&self) -> &str {
        &self.text
    }

    pub fn records(&self) -> &[Value] {
        &self.records
    }

    pub fn write_json_lines<W: Write>(&self, mut out: W) -> Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}
