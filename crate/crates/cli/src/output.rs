//! Result tables rendered as one JSON object or as CSV.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub command: String,
    pub points: Vec<String>,
    pub frame: String,
    pub kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Fitted (C₃,₁)², when a Green's function needed it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c31_squared: Option<f64>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub extra: Map<String, Value>,
}

/// Rows sharing one set of columns; absent cells are null.
#[derive(Debug, Clone, Default)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn objects(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .filter(|(_, v)| !v.is_null())
                    .map(|(c, v)| (c.to_string(), v.clone()))
                    .collect();
                Value::Object(m)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub provenance: Provenance,
    pub status: &'static str,
    pub table: Table,
}

impl Report {
    /// Rows whose `pass` column is false.
    pub fn table_failures(&self) -> usize {
        let Some(col) = self.table.columns.iter().position(|c| *c == "pass") else {
            return 0;
        };
        self.table.rows.iter().filter(|r| r[col] == Value::Bool(false)).count()
    }

    pub fn json(&self) -> Result<String, CliError> {
        let body = serde_json::json!({
            "provenance": self.provenance,
            "status": self.status,
            "results": self.table.objects(),
        });
        let mut s = serde_json::to_string_pretty(&body).map_err(|e| CliError::Encode(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let enc = |e: csv::Error| CliError::Encode(e.to_string());
        w.write_record(&self.table.columns).map_err(enc)?;
        for row in &self.table.rows {
            w.write_record(row.iter().map(cell)).map_err(enc)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Encode(e.to_string()))
    }

    /// Writes to `path` or stdout. CSV written to a file gets its provenance
    /// in a `<path>.provenance.json` sidecar.
    pub fn write(&self, format: Format, path: Option<&Path>) -> Result<(), CliError> {
        let text = match format {
            Format::Json => self.json()?,
            Format::Csv => self.csv()?,
        };
        match path {
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
            Some(p) => {
                std::fs::write(p, text)?;
                if format == Format::Csv {
                    let mut side = p.as_os_str().to_owned();
                    side.push(".provenance.json");
                    let json = serde_json::to_string_pretty(&self.provenance).map_err(|e| CliError::Encode(e.to_string()))?;
                    std::fs::write(side, json + "\n")?;
                }
            }
        }
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_quotes_and_blanks() {
        let mut t = Table::new(&["name", "value"]);
        t.push(vec![json!("a,b"), json!(0.5)]);
        t.push(vec![json!("c"), Value::Null]);
        let r = Report { provenance: Provenance::default(), status: "ok", table: t };
        assert_eq!(r.csv().unwrap(), "name,value\n\"a,b\",0.5\nc,\n");
        let j: Value = serde_json::from_str(&r.json().unwrap()).unwrap();
        assert_eq!(j["results"][1], json!({"name": "c"}));
    }
}
