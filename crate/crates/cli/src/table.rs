use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// One cell of a table. `Blank` renders as an empty CSV field and JSON `null`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Blank,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
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

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn render_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => render_number(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Blank => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::String(render_number(*v)), Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Blank => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl FunctionTable {
    pub fn new(columns: &[&str]) -> Self {
        FunctionTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }
}

#[derive(Serialize)]
struct JsonTable<'a> {
    columns: &'a [String],
    rows: Vec<Vec<Value>>,
    meta: &'a Value,
}

/// Writes the table as CSV (header, `,` separator, LF endings) or as a JSON
/// object with `columns`, `rows` and `meta`.
pub fn emit_table(table: &FunctionTable, format: Format, meta: &Value, sink: &mut dyn Write) -> Result<(), CliError> {
    if let Some(bad) = table.rows.iter().position(|r| r.len() != table.columns.len()) {
        return Err(CliError::Internal(format!(
            "row {bad} has {} cells for {} columns",
            table.rows[bad].len(),
            table.columns.len()
        )));
    }
    match format {
        Format::Csv => {
            let mut out = table.columns.join(",");
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            sink.write_all(out.as_bytes())?;
        }
        Format::Json => {
            let doc = JsonTable {
                columns: &table.columns,
                rows: table.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect(),
                meta,
            };
            let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Internal(e.to_string()))?;
            text.push('\n');
            sink.write_all(text.as_bytes())?;
        }
    }
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(table: &FunctionTable) -> String {
        let mut buf = Vec::new();
        emit_table(table, Format::Csv, &Value::Null, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_and_single() {
        let mut t = FunctionTable::new(&["a"]);
        assert_eq!(csv(&t), "a\n");
        t.push(vec![Cell::Num(0.5)]);
        assert_eq!(csv(&t), "a\n5.0000000000000000e-1\n");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX, std::f64::consts::PI, -0.0] {
            let back: f64 = render_number(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v}");
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let mut t = FunctionTable::new(&["a", "b"]);
        t.push(vec![Cell::Blank]);
        let mut buf = Vec::new();
        assert!(emit_table(&t, Format::Csv, &Value::Null, &mut buf).is_err());
    }

    #[test]
    fn json_shape() {
        let mut t = FunctionTable::new(&["x", "note"]);
        t.push(vec![Cell::Num(1.5), Cell::Blank]);
        let mut buf = Vec::new();
        emit_table(&t, Format::Json, &serde_json::json!({"k": 1}), &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["columns"], serde_json::json!(["x", "note"]));
        assert_eq!(v["rows"][0][0], serde_json::json!(1.5));
        assert!(v["rows"][0][1].is_null());
        let text = String::from_utf8(buf).unwrap();
        assert!(text.find("\"columns\"").unwrap() < text.find("\"rows\"").unwrap());
        assert!(text.find("\"rows\"").unwrap() < text.find("\"meta\"").unwrap());
    }
}
