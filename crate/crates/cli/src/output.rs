use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::CliError;

/// A titled table of pre-formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, headers: &[&str]) -> Self {
        Table {
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
    }

    fn markdown(&self) -> String {
        let escape = |s: &str| s.replace('|', "\\|");
        let mut out = format!("### {}\n\n", self.title);
        out += &format!("| {} |\n", self.headers.iter().map(|h| escape(h)).collect::<Vec<_>>().join(" | "));
        out += &format!("|{}\n", self.headers.iter().map(|_| "---|").collect::<String>());
        for row in &self.rows {
            out += &format!("| {} |\n", row.iter().map(|c| escape(c)).collect::<Vec<_>>().join(" | "));
        }
        out
    }

    /// Rows as objects; cells that parse as numbers become JSON numbers.
    fn json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (h, cell) in self.headers.iter().zip(row) {
                    obj.insert(h.clone(), cell_value(cell));
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

fn cell_value(cell: &str) -> Value {
    if let Ok(i) = cell.parse::<i64>() {
        return Value::from(i);
    }
    match cell.parse::<f64>() {
        Ok(x) if x.is_finite() => serde_json::Number::from_f64(x).map_or_else(|| Value::String(cell.into()), Value::Number),
        _ => match cell {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            "" => Value::Null,
            _ => Value::String(cell.into()),
        },
    }
}

pub fn render(tables: &[Table], format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => {
            let parts: Result<Vec<String>, CliError> = tables.iter().map(Table::csv).collect();
            Ok(parts?.join("\n"))
        }
        Format::Markdown => Ok(tables.iter().map(Table::markdown).collect::<Vec<_>>().join("\n")),
        Format::Json => {
            let value = if let [single] = tables {
                single.json()
            } else {
                Value::Object(tables.iter().map(|t| (t.title.clone(), t.json())).collect())
            };
            Ok(serde_json::to_string_pretty(&value).expect("serializable") + "\n")
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn pass(ok: bool) -> String {
    if ok { "pass" } else { "FAIL" }.to_string()
}
